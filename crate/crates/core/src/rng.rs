//! Uniform sources.
//!
//! [`Shr3`] is Marsaglia's three-shift xorshift generator with shifts
//! `(13, 17, 5)`. Anything implementing [`UniformSource`] can drive the
//! samplers.

use thiserror::Error;

use crate::transforms::{UNIT_MAX, UNIT_MIN};

/// Fallback seed when none is supplied.
pub const DEFAULT_SEED: u32 = 0x2545_F491;

const TWO_POW_NEG_32: f64 = 1.0 / 4_294_967_296.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeedError {
    #[error("seed must be nonzero: the all-zero xorshift state is absorbing")]
    Zero,
    #[error("cannot parse seed {0:?} as a decimal or 0x-prefixed hexadecimal 32-bit value")]
    Parse(String),
}

/// A deterministic stream of 32-bit words.
pub trait UniformSource {
    fn next_u32(&mut self) -> u32;

    /// A real strictly inside `(0, 1)`.
    #[inline]
    fn next_unit(&mut self) -> f64 {
        to_unit_interval(self.next_u32())
    }

    /// Two words composed high-then-low.
    #[inline]
    fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }
}

impl<S: UniformSource + ?Sized> UniformSource for &mut S {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (**self).next_u32()
    }
}

/// `(w + 1/2) / 2^32`, clamped into `[2^-53, 1 - 2^-53]`.
#[inline]
pub fn to_unit_interval(w: u32) -> f64 {
    ((w as f64 + 0.5) * TWO_POW_NEG_32).clamp(UNIT_MIN, UNIT_MAX)
}

/// SHR3 xorshift generator. The state is never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shr3 {
    y: u32,
}

impl Shr3 {
    pub fn new(seed: u32) -> Result<Self, SeedError> {
        if seed == 0 {
            Err(SeedError::Zero)
        } else {
            Ok(Self { y: seed })
        }
    }

    pub fn state(&self) -> u32 {
        self.y
    }

    /// Advances the state; the new state is also the output word.
    #[inline]
    pub fn step(self) -> (Self, u32) {
        let mut y = self.y;
        y ^= y << 13;
        y ^= y >> 17;
        y ^= y << 5;
        (Self { y }, y)
    }
}

impl Default for Shr3 {
    fn default() -> Self {
        Self { y: DEFAULT_SEED }
    }
}

impl UniformSource for Shr3 {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        let (next, w) = self.step();
        *self = next;
        w
    }
}

/// Parses `"12345"` or `"0x2545F491"`.
pub fn parse_seed(text: &str) -> Result<u32, SeedError> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => t.parse::<u32>(),
    };
    match parsed {
        Ok(0) => Err(SeedError::Zero),
        Ok(s) => Ok(s),
        Err(_) => Err(SeedError::Parse(text.to_string())),
    }
}

/// Seed for the `index`-th parallel stream. Stream 0 keeps the base seed;
/// the others get a splitmix-style mix that never returns zero.
pub fn derive_seed(base: u32, index: u32) -> u32 {
    if index == 0 {
        return base;
    }
    let mut z = ((base as u64) << 32 | index as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    match (z ^ (z >> 32)) as u32 {
        0 => DEFAULT_SEED,
        s => s,
    }
}
