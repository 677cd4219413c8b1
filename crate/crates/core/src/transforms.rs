//! Two-dimensional transform maps from the unit square to variates.
//!
//! [`stable_transform`] is the Chambers–Mallows–Stuck map `F(u, v)` for
//! standard Lévy α-stable variates, [`ml_transform`] the Kozubowski–Rachev
//! map `M(u, v)` for Mittag-Leffler waiting times. Both are evaluated
//! verbatim; no series expansions or approximations are involved.
//!
//! The skewness angle of the stable map is `Φ0 = (π/2)·β·(1 − |1 − α|)/α`,
//! which is Zolotarev's parametrization. For `β ≠ 0` and `α ≠ 1` this is not
//! the same `β` (or scale) as the `tan(πα/2)` characteristic-function
//! convention used by [`crate::oracle`]; see
//! [`crate::oracle::zolotarev_to_s1`] for the exact correspondence.

use std::f64::consts::{FRAC_2_PI, PI};

use thiserror::Error;

/// `|α − 1|` below which the dedicated `α = 1` branch is used.
pub const ALPHA_ONE_BRANCH: f64 = 1e-8;

/// Smallest unit-interval value handed to a transform.
pub const UNIT_MIN: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
/// Largest unit-interval value handed to a transform.
pub const UNIT_MAX: f64 = 1.0 - UNIT_MIN;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("alpha must satisfy 0 < alpha <= 2 (got {0})")]
    StableAlpha(f64),
    #[error("beta must satisfy -1 <= beta <= 1 (got {0})")]
    Beta(f64),
    #[error("gamma must be finite and > 0 (got {0})")]
    Gamma(f64),
    #[error("delta must be finite (got {0})")]
    Delta(f64),
    #[error("Mittag-Leffler alpha must satisfy 0 < alpha <= 1 (got {0})")]
    MlAlpha(f64),
    #[error("unit pair must lie strictly inside (0,1)^2 (got u={u}, v={v})")]
    UnitPair { u: f64, v: f64 },
}

/// The map produced a non-finite value, which happens only near the
/// singular corners and pole lines of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("singular evaluation of the transform map")]
pub struct Singular;

/// Parameters `(α, β, γ, δ)` of the stable family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, ParamError> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 2.0) {
            return Err(ParamError::StableAlpha(alpha));
        }
        if !(beta.is_finite() && (-1.0..=1.0).contains(&beta)) {
            return Err(ParamError::Beta(beta));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(ParamError::Gamma(gamma));
        }
        if !delta.is_finite() {
            return Err(ParamError::Delta(delta));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// Standard parameters: `γ = 1`, `δ = 0`.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self, ParamError> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_symmetric(&self) -> bool {
        self.beta == 0.0
    }

    pub(crate) fn uses_alpha_one_branch(&self) -> bool {
        (self.alpha - 1.0).abs() < ALPHA_ONE_BRANCH
    }
}

/// Order `α ∈ (0, 1]` of the one-parameter Mittag-Leffler distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    alpha: f64,
}

impl MlParams {
    pub fn new(alpha: f64) -> Result<Self, ParamError> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
            return Err(ParamError::MlAlpha(alpha));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// A point strictly inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPair {
    u: f64,
    v: f64,
}

impl UnitPair {
    pub fn new(u: f64, v: f64) -> Result<Self, ParamError> {
        if u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 {
            Ok(Self { u, v })
        } else {
            Err(ParamError::UnitPair { u, v })
        }
    }

    /// Clamps arbitrary coordinates into `[2^-53, 1 - 2^-53]^2`.
    pub fn clamped(u: f64, v: f64) -> Self {
        Self {
            u: u.clamp(UNIT_MIN, UNIT_MAX),
            v: v.clamp(UNIT_MIN, UNIT_MAX),
        }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

#[inline]
fn finite(x: f64) -> Result<f64, Singular> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Singular)
    }
}

/// Standard stable variate `F_{αβ}(u, v)`. Only `α` and `β` are read;
/// scale and location are applied by [`apply_scale_location`].
#[inline]
pub fn stable_transform(p: &StableParams, pt: UnitPair) -> Result<f64, Singular> {
    stable_row(p, pt.v).combine(-pt.u.ln())
}

/// Mittag-Leffler waiting time `M_α(u, v)`; always nonnegative.
///
/// The leading factor is `-ln u`, so that `α = 1` gives the standard
/// exponential transform.
#[inline]
pub fn ml_transform(p: &MlParams, pt: UnitPair) -> Result<f64, Singular> {
    ml_row(p, pt.v).combine(-pt.u.ln())
}

/// The factors of a map that depend on `v` only. Combining a row with
/// `W = -ln u` performs exactly the arithmetic of a pointwise evaluation, so
/// lattices evaluated row by row are bit-identical to pointwise results.
#[derive(Debug, Clone, Copy)]
enum Row {
    /// `lead · ((W cos Φ) / denom)^expo`
    General { lead: f64, cos_phi: f64, denom: f64, expo: f64 },
    /// `lead - k · ln((W cos Φ) / skew)`
    AlphaOne { lead: f64, cos_phi: f64, skew: f64, k: f64 },
    /// `W · factor`
    Product { factor: f64 },
    Singular,
}

impl Row {
    #[inline]
    fn combine(&self, w: f64) -> Result<f64, Singular> {
        let x = match *self {
            Row::General { lead, cos_phi, denom, expo } => lead * ((w * cos_phi) / denom).powf(expo),
            Row::AlphaOne { lead, cos_phi, skew, k } => lead - k * ((w * cos_phi) / skew).ln(),
            Row::Product { factor } => w * factor,
            Row::Singular => return Err(Singular),
        };
        finite(x)
    }
}

#[inline]
fn stable_row(p: &StableParams, v: f64) -> Row {
    let (alpha, beta) = (p.alpha, p.beta);
    let phi = PI * (v - 0.5);
    if p.uses_alpha_one_branch() {
        let skew = 1.0 + FRAC_2_PI * beta * phi;
        Row::AlphaOne {
            lead: skew * phi.tan(),
            cos_phi: phi.cos(),
            skew,
            k: FRAC_2_PI * beta,
        }
    } else {
        let phi0 = 0.5 * PI * beta * (1.0 - (1.0 - alpha).abs()) / alpha;
        let a = alpha * (phi + phi0);
        Row::General {
            lead: a.sin() / phi.cos(),
            cos_phi: phi.cos(),
            denom: (phi - a).cos(),
            expo: 1.0 - 1.0 / alpha,
        }
    }
}

#[inline]
fn ml_row(p: &MlParams, v: f64) -> Row {
    let a_pi = p.alpha * PI;
    let t = (a_pi * v).tan();
    if t == 0.0 {
        return Row::Singular;
    }
    if p.alpha == 1.0 {
        // sin π vanishes exactly; the rounded value would leave a v-dependence.
        return Row::Product { factor: 1.0 };
    }
    let bracket = a_pi.sin() / t - a_pi.cos();
    if !(bracket >= 0.0) {
        return Row::Singular;
    }
    Row::Product {
        factor: bracket.powf(1.0 / p.alpha),
    }
}

/// `γ·x + δ`.
#[inline]
pub fn apply_scale_location(x: f64, p: &StableParams) -> f64 {
    p.gamma * x + p.delta
}

/// Which transform a tile table or sampler is built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformMap {
    Stable(StableParams),
    MittagLeffler(MlParams),
}

impl TransformMap {
    /// Full variate, including scale and location for the stable map.
    #[inline]
    pub fn eval(&self, pt: UnitPair) -> Result<f64, Singular> {
        match self {
            TransformMap::Stable(p) => stable_transform(p, pt).map(|x| apply_scale_location(x, p)),
            TransformMap::MittagLeffler(p) => ml_transform(p, pt),
        }
    }

    /// Evaluates the map on the lattice `us x vs` after clamping both into
    /// the unit interval. `out[a * vs.len() + b]` holds the value at
    /// `(us[a], vs[b])`, identical to `eval` at the clamped point.
    pub fn eval_lattice(&self, us: &[f64], vs: &[f64], out: &mut Vec<Result<f64, Singular>>) {
        out.clear();
        let ws: Vec<f64> = us.iter().map(|&u| -u.clamp(UNIT_MIN, UNIT_MAX).ln()).collect();
        let rows: Vec<Row> = vs
            .iter()
            .map(|&v| {
                let v = v.clamp(UNIT_MIN, UNIT_MAX);
                match self {
                    TransformMap::Stable(p) => stable_row(p, v),
                    TransformMap::MittagLeffler(p) => ml_row(p, v),
                }
            })
            .collect();
        for &w in &ws {
            for row in &rows {
                out.push(match self {
                    TransformMap::Stable(p) => row.combine(w).map(|x| apply_scale_location(x, p)),
                    TransformMap::MittagLeffler(_) => row.combine(w),
                });
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            TransformMap::Stable(p) => p.alpha,
            TransformMap::MittagLeffler(p) => p.alpha,
        }
    }

    /// Whether the closed tile `[i, i+1] x [j, j+1] / 2^level` touches a
    /// point or line where the map is singular.
    ///
    /// For stable maps with `α < 2` all four corners are quarantined: the
    /// singular corners `(0,1)` and `(1,1)` have mirror images at `v = 0`
    /// under the reflection `v -> 1 - v`. Mittag-Leffler maps
    /// quarantine the rows along `v = 0` and `v = 1`.
    pub fn touches_singularity(&self, level: u32, i: u32, j: u32) -> bool {
        let last = ((1u64 << level) - 1) as u32;
        match self {
            TransformMap::Stable(p) => {
                p.alpha != 2.0 && (i == 0 || i == last) && (j == 0 || j == last)
            }
            TransformMap::MittagLeffler(_) => j == 0 || j == last,
        }
    }
}
