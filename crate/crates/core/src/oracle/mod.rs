//! Slow, accurate reference evaluation of densities and distribution
//! functions, used to validate the samplers and to check tile tables.
//!
//! The stable routines invert the characteristic function numerically and
//! share nothing with the transform maps, so agreement between the two is a
//! genuine cross-check.
//!
//! Convention: the skewness term of the characteristic function is
//! `tan(πα/2)` (the usual S1 parametrization), and scale and location act on
//! the variate as `X = γ·Z + δ`.

mod mittag_leffler;
mod quadrature;
mod stable;

use thiserror::Error;

pub use mittag_leffler::{ml_cdf, ml_pdf, ml_survival, SURVIVAL_REL_TOL};
pub use stable::{stable_cdf, stable_pdf, tail_constant, transform_law, zolotarev_to_s1};

use crate::region::RegionSpec;
use crate::transforms::{StableParams, TransformMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("numerical evaluation did not converge (estimate {estimate}, error estimate {error})")]
    ConvergenceFailure { estimate: f64, error: f64 },
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(&'static str),
    #[error("argument {0} is outside the domain")]
    Domain(f64),
}

/// Controls the numerical inversion of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Largest frequency `k` integrated explicitly; the remainder is bounded
    /// analytically and added to the error estimate.
    pub max_abscissa: f64,
    pub abs_tol: f64,
    /// Cap on oscillation panels (and on bisections within one range).
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(max_abscissa: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self, OracleError> {
        if !(abs_tol > 0.0) {
            return Err(OracleError::InvalidSpec("abs_tol must be > 0"));
        }
        if !(max_abscissa > 0.0) {
            return Err(OracleError::InvalidSpec("max_abscissa must be > 0"));
        }
        if max_subdivisions < 1 {
            return Err(OracleError::InvalidSpec("max_subdivisions must be >= 1"));
        }
        Ok(Self {
            max_abscissa,
            abs_tol,
            max_subdivisions,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            max_abscissa: 1e8,
            abs_tol: 1e-10,
            max_subdivisions: 20_000,
        }
    }
}

/// A stable distribution function tabulated on an `asinh`-spaced grid and
/// interpolated linearly, with power-law extrapolation past the ends.
///
/// Evaluating [`stable_cdf`] at 10^5 sample points is too slow for a test;
/// the table makes it a lookup while staying within about 1e-6 of the
/// pointwise value.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    params: StableParams,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCdf {
    /// Tabulates over standardized abscissae `|z| <= z_max` with `nodes`
    /// points.
    pub fn new(p: &StableParams, z_max: f64, nodes: usize, q: &QuadratureSpec) -> Result<Self, OracleError> {
        let nodes = nodes.max(3);
        let s_max = z_max.asinh();
        let grid: Vec<f64> = (0..nodes)
            .map(|i| -s_max + 2.0 * s_max * i as f64 / (nodes - 1) as f64)
            .collect();
        let std = StableParams::new(p.alpha(), p.beta(), 1.0, 0.0).expect("valid");
        let values = grid
            .iter()
            .map(|&s| stable_cdf(&std, s.sinh(), q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            params: *p,
            grid,
            values,
        })
    }

    /// Range and resolution chosen from `α` so that both the interpolation
    /// and the tail extrapolation stay below roughly 1e-6.
    pub fn auto(p: &StableParams, q: &QuadratureSpec) -> Result<Self, OracleError> {
        let z_max = if p.alpha() >= 2.0 {
            40.0
        } else {
            10f64.powf(4.0 / p.alpha()).clamp(40.0, 1e7)
        };
        Self::new(p, z_max, 20_001, q)
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let z = (x - self.params.delta()) / self.params.gamma();
        let s = z.asinh();
        let n = self.grid.len();
        let (s_lo, s_hi) = (self.grid[0], self.grid[n - 1]);
        let alpha = self.params.alpha();
        if s <= s_lo {
            let z_lo = s_lo.sinh();
            return self.values[0] * (z_lo / z).abs().powf(alpha);
        }
        if s >= s_hi {
            let z_hi = s_hi.sinh();
            return 1.0 - (1.0 - self.values[n - 1]) * (z_hi / z).abs().powf(alpha);
        }
        let pos = (s - s_lo) / (s_hi - s_lo) * (n - 1) as f64;
        let k = (pos.floor() as usize).min(n - 2);
        let frac = pos - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }
}

/// Distribution function on a lower tail `x <= top`, kept to small relative
/// error so that it can be divided by the tail mass.
///
/// `ln F` is tabulated against `ln(-z)` of the standardized abscissa, where it
/// is close to linear, and extended linearly beyond the last node.
#[derive(Debug, Clone)]
pub struct LowerTailCdf {
    params: StableParams,
    top: f64,
    log_z: Vec<f64>,
    log_f: Vec<f64>,
}

impl LowerTailCdf {
    /// Node spacing in `ln(-z)`.
    const STEP: f64 = 0.01;

    /// `top` must map to a negative standardized abscissa.
    pub fn new(p: &StableParams, top: f64, q: &QuadratureSpec) -> Result<Self, OracleError> {
        let z_top = (top - p.delta()) / p.gamma();
        if !(z_top < 0.0) || !z_top.is_finite() {
            return Err(OracleError::Domain(top));
        }
        let std = StableParams::new(p.alpha(), p.beta(), 1.0, 0.0).expect("valid");
        let s0 = (-z_top).ln();
        let far = 10f64.powf(6.0 / p.alpha()).clamp(1e3, 1e8).max(10.0 * -z_top);
        let nodes = ((far.ln() - s0) / Self::STEP).ceil() as usize + 1;
        let mut log_z = Vec::with_capacity(nodes);
        let mut log_f = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let s = s0 + k as f64 * Self::STEP;
            let f = stable_cdf(&std, -s.exp(), q)?;
            // Past this point the absolute quadrature error dominates.
            if f <= 1e3 * q.abs_tol || log_f.last().is_some_and(|&last| f.ln() >= last) {
                break;
            }
            log_z.push(s);
            log_f.push(f.ln());
        }
        if log_z.len() < 2 {
            return Err(OracleError::Domain(top));
        }
        Ok(Self {
            params: *p,
            top,
            log_z,
            log_f,
        })
    }

    pub fn top(&self) -> f64 {
        self.top
    }

    /// `F(x)` for `x <= top`; larger arguments are treated as `top`.
    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        let z = (x.min(self.top) - self.params.delta()) / self.params.gamma();
        let s = (-z).ln().max(self.log_z[0]);
        let n = self.log_z.len();
        let k = (((s - self.log_z[0]) / Self::STEP).floor() as usize).min(n - 2);
        let slope = (self.log_f[k + 1] - self.log_f[k]) / (self.log_z[k + 1] - self.log_z[k]);
        (self.log_f[k] + slope * (s - self.log_z[k])).exp()
    }
}

/// `P(X <= x | X ∈ region)` for a continuous distribution function `cdf`.
pub fn conditional_cdf<F>(cdf: F, region: &RegionSpec) -> impl Fn(f64) -> f64 + Send + Sync
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    let pieces: Vec<(f64, f64, f64, f64)> = region
        .intervals()
        .iter()
        .map(|iv| {
            let (a, b) = iv.endpoints();
            (a, b, cdf_at(&cdf, a), cdf_at(&cdf, b))
        })
        .collect();
    let mass: f64 = pieces.iter().map(|p| p.3 - p.2).sum();
    move |x| {
        let mut acc = 0.0;
        for &(a, b, fa, fb) in &pieces {
            if x >= b {
                acc += fb - fa;
            } else if x > a {
                acc += cdf(x) - fa;
            }
        }
        (acc / mass).clamp(0.0, 1.0)
    }
}

/// Reference distribution function of `map`'s output conditioned on
/// `region`, built from the oracles alone.
///
/// Stable maps are compared with [`transform_law`] of their parameters. A
/// region that is a single lower tail uses [`LowerTailCdf`]; anything else
/// uses [`TabulatedCdf`]. Mittag-Leffler maps use [`ml_cdf`] pointwise.
pub fn reference_cdf(
    map: &TransformMap,
    region: &RegionSpec,
    q: &QuadratureSpec,
) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>, OracleError> {
    let base: Box<dyn Fn(f64) -> f64 + Send + Sync> = match map {
        TransformMap::Stable(p) => {
            let law = transform_law(p);
            match region.intervals() {
                [iv] if iv.endpoints().0 == f64::NEG_INFINITY && iv.endpoints().1 < law.delta() => {
                    let tail = LowerTailCdf::new(&law, iv.endpoints().1, q)?;
                    Box::new(move |x| tail.eval(x))
                }
                _ => {
                    let tab = TabulatedCdf::auto(&law, q)?;
                    Box::new(move |x| tab.eval(x))
                }
            }
        }
        TransformMap::MittagLeffler(p) => {
            let p = *p;
            ml_cdf(&p, 1.0)?;
            Box::new(move |t| ml_cdf(&p, t).unwrap_or(f64::NAN))
        }
    };
    if region.is_full_line() {
        return Ok(base);
    }
    Ok(Box::new(conditional_cdf(base, region)))
}

/// Probability mass of `region` under `cdf`.
pub fn region_mass<F: Fn(f64) -> f64>(cdf: F, region: &RegionSpec) -> f64 {
    region
        .intervals()
        .iter()
        .map(|iv| {
            let (a, b) = iv.endpoints();
            cdf_at(&cdf, b) - cdf_at(&cdf, a)
        })
        .sum()
}

fn cdf_at<F: Fn(f64) -> f64>(cdf: &F, x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        cdf(x)
    }
}
