//! Survival function `E_α(-t^α)` and density of the Mittag-Leffler
//! distribution.
//!
//! Three routes are combined. The power series `Σ (-z)^n / Γ(αn + 1)` with
//! `z = t^α` loses digits to cancellation once `t` grows. The asymptotic
//! expansion `Σ_{k≥1} (-1)^{k+1} z^{-k} / Γ(1 - αk)` is truncated at its
//! smallest term. Where neither is accurate enough, the spectral form
//!
//! ```text
//! E_α(-t^α) = sin(απ)/(απ) ∫_0^∞ exp(-t s^{1/α}) / (s² + 2s cos(απ) + 1) ds
//! ```
//!
//! has a positive integrand and is integrated by adaptive quadrature. The
//! density uses the same form with an extra factor `s^{1/α}`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::quadrature::integrate;
use super::OracleError;
use crate::transforms::MlParams;

/// Relative accuracy demanded of the survival function and density.
pub const SURVIVAL_REL_TOL: f64 = 1e-8;

/// A series route is taken only when it beats the target by this factor.
const SERIES_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Series,
    Asymptotic,
    Spectral,
}

#[derive(Debug, Clone, Copy)]
struct Estimate {
    value: f64,
    error: f64,
}

fn series(alpha: f64, z: f64) -> Estimate {
    if z == 0.0 {
        return Estimate {
            value: 1.0,
            error: 0.0,
        };
    }
    let ln_z = z.ln();
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    let mut n: u32 = 0;
    // Terms peak near n ≈ z^{1/α} / α; run well past it.
    let peak = z.powf(1.0 / alpha) / alpha;
    loop {
        let nf = n as f64;
        let mag = (nf * ln_z - ln_gamma(alpha * nf + 1.0)).exp();
        let term = if n.is_multiple_of(2) { mag } else { -mag };
        sum += term;
        largest = largest.max(mag);
        n += 1;
        if (nf > peak && mag <= f64::EPSILON * 1e-2 * sum.abs().max(1e-300)) || n > 100_000 {
            break;
        }
    }
    Estimate {
        value: sum,
        error: 8.0 * f64::EPSILON * largest * (n as f64).sqrt() + 1e-300,
    }
}

fn asymptotic(alpha: f64, z: f64) -> Estimate {
    let ln_z = z.ln();
    let mut sum = 0.0;
    let mut last_envelope = f64::INFINITY;
    for k in 1..1000u32 {
        let kf = k as f64;
        // 1/Γ(1 - αk) = Γ(αk) sin(παk) / π; the envelope drops the sine.
        let envelope = (ln_gamma(alpha * kf) - kf * ln_z).exp() / PI;
        if envelope > last_envelope {
            break;
        }
        let term = envelope * (PI * alpha * kf).sin();
        sum += if k % 2 == 1 { term } else { -term };
        last_envelope = envelope;
        if envelope <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    Estimate {
        value: sum,
        error: last_envelope,
    }
}

/// Beyond this `t` the series' largest term (about `e^t`) swamps f64.
const SERIES_T_MAX: f64 = 40.0;

/// `∫_0^∞ s^{m/α} exp(-t s^{1/α}) / (s² + 2s cos(απ) + 1) ds · sin(απ)/(απ)`
/// for `m = 0` (survival) or `m = 1` (density).
fn spectral(alpha: f64, t: f64, density: bool) -> Estimate {
    let inv = 1.0 / alpha;
    let c = (PI * alpha).cos();
    let f = |s: f64| {
        let r = s.powf(inv);
        let e = (-t * r).exp();
        let num = if density { r * e } else { e };
        num / (s * (s + 2.0 * c) + 1.0)
    };
    // exp(-750) underflows; nothing beyond contributes.
    let s_max = (750.0 / t).powf(alpha);
    let scale = t.powf(-alpha);
    let mut cuts = vec![0.0, 1.0, s_max];
    for k in -40..=40 {
        cuts.push(scale * 2f64.powi(k));
    }
    let (peak, width) = (-c, (PI * alpha).sin());
    if peak > 0.0 {
        for m in [-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0] {
            cuts.push(peak + m * width);
        }
    }
    cuts.retain(|&x| (0.0..=s_max).contains(&x));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rough: f64 = cuts
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], f64::INFINITY, 1).value)
        .sum();
    let tol = 1e-3 * SURVIVAL_REL_TOL * rough.abs() / cuts.len() as f64;
    let (mut value, mut error) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let q = integrate(&f, w[0], w[1], tol, 500);
        value += q.value;
        error += q.error;
    }
    let k = width / (PI * alpha);
    Estimate {
        value: k * value,
        error: k * error,
    }
}

fn survival_estimate(alpha: f64, t: f64) -> (Route, Estimate) {
    let z = t.powf(alpha);
    let good = |e: &Estimate| e.value.is_finite() && e.error <= SERIES_MARGIN * SURVIVAL_REL_TOL * e.value.abs();
    if z < 1.0 {
        let s = series(alpha, z);
        if good(&s) {
            return (Route::Series, s);
        }
    } else {
        let a = asymptotic(alpha, z);
        if good(&a) {
            return (Route::Asymptotic, a);
        }
        if t <= SERIES_T_MAX {
            let s = series(alpha, z);
            if good(&s) {
                return (Route::Series, s);
            }
        }
    }
    (Route::Spectral, spectral(alpha, t, false))
}

fn evaluate(alpha: f64, t: f64, route: Route) -> Estimate {
    match route {
        Route::Series => series(alpha, t.powf(alpha)),
        Route::Asymptotic => asymptotic(alpha, t.powf(alpha)),
        Route::Spectral => spectral(alpha, t, false),
    }
}

fn check(est: Estimate) -> Result<f64, OracleError> {
    if est.value.is_finite() && est.error <= SURVIVAL_REL_TOL * est.value.abs() {
        Ok(est.value)
    } else {
        Err(OracleError::ConvergenceFailure {
            estimate: est.value,
            error: est.error,
        })
    }
}

/// `P(T > t) = E_α(-t^α)`; exactly `e^{-t}` for `α = 1`.
pub fn ml_survival(p: &MlParams, t: f64) -> Result<f64, OracleError> {
    let alpha = p.alpha();
    if t.is_nan() || t < 0.0 {
        return Err(OracleError::Domain(t));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if alpha == 1.0 {
        return Ok((-t).exp());
    }
    if t == f64::INFINITY {
        return Ok(0.0);
    }
    check(survival_estimate(alpha, t).1).map(|s| s.clamp(0.0, 1.0))
}

/// `P(T <= t)`, zero for negative `t`.
pub fn ml_cdf(p: &MlParams, t: f64) -> Result<f64, OracleError> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    ml_survival(p, t).map(|s| 1.0 - s)
}

/// Density `-d/dt E_α(-t^α)` by a central difference with step
/// `h = max(1e-6, 1e-6 t)`. Both evaluations use the route chosen at `t`, so
/// the difference never straddles a switch between routes.
pub fn ml_pdf(p: &MlParams, t: f64) -> Result<f64, OracleError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(OracleError::Domain(t));
    }
    let alpha = p.alpha();
    let h = 1e-6f64.max(1e-6 * t).min(0.5 * t);
    if alpha == 1.0 {
        return Ok(((-(t - h)).exp() - (-(t + h)).exp()) / (2.0 * h));
    }
    let (route, centre) = survival_estimate(alpha, t);
    check(centre)?;
    let lo = evaluate(alpha, t - h, route);
    let hi = evaluate(alpha, t + h, route);
    Ok(((lo.value - hi.value) / (2.0 * h)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::gamma;

    fn ml(alpha: f64) -> MlParams {
        MlParams::new(alpha).unwrap()
    }

    #[test]
    fn survival_at_zero_is_one() {
        for a in [0.1, 0.5, 0.9, 1.0] {
            assert_eq!(ml_survival(&ml(a), 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn exponential_case() {
        assert_relative_eq!(ml_survival(&ml(1.0), 1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(ml_pdf(&ml(1.0), 0.5).unwrap(), (-0.5f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn power_law_tail() {
        let (a, t) = (0.9, 50f64);
        let z = t.powf(a);
        let s = ml_survival(&ml(a), t).unwrap();
        let three_terms: f64 = (1..=3)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * z.powi(-k) / gamma(1.0 - a * k as f64)
            })
            .sum();
        // The fourth term is about 3e-4 of the total.
        assert_relative_eq!(s, three_terms, max_relative = 1e-3);
    }

    #[test]
    fn half_order_closed_form() {
        // E_{1/2}(-x) = exp(x^2) erfc(x)
        use statrs::function::erf::erfc;
        for t in [0.01f64, 0.3, 1.0, 4.0, 25.0, 400.0, 1e4] {
            let x = t.sqrt();
            let exact = if x < 20.0 {
                (x * x).exp() * erfc(x)
            } else {
                // exp(x²) erfc(x) ~ 1/(x√π) (1 - 1/(2x²) + 3/(4x⁴) - 15/(8x⁶))
                let y = 1.0 / (x * x);
                (1.0 - 0.5 * y + 0.75 * y * y - 1.875 * y * y * y) / (x * PI.sqrt())
            };
            let s = ml_survival(&ml(0.5), t).unwrap();
            assert_relative_eq!(s, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn routes_agree() {
        for a in [0.3, 0.6, 0.9, 0.99] {
            for t in [0.5f64, 3.0, 20.0, 300.0] {
                let reference = spectral(a, t, false);
                let z = t.powf(a);
                for other in [series(a, z), asymptotic(a, z)] {
                    if other.value.is_finite() && other.error < 1e-10 * reference.value {
                        assert_relative_eq!(other.value, reference.value, max_relative = 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn difference_density_matches_spectral_density() {
        for a in [0.3, 0.7, 0.95] {
            for t in [1e-3f64, 0.05, 1.0, 7.0, 60.0, 2e3] {
                let exact = spectral(a, t, true);
                assert!(exact.error < 1e-10 * exact.value);
                // Differencing turns 1e-14 survival noise into ~1e-6 here.
                assert_relative_eq!(ml_pdf(&ml(a), t).unwrap(), exact.value, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn survival_strictly_decreasing() {
        for a in [0.3, 0.6, 0.9, 0.99] {
            let mut prev = 1.0;
            let mut t = 1e-3;
            while t < 1e4 {
                let s = ml_survival(&ml(a), t).unwrap();
                assert!(s < prev, "alpha {a} t {t}: {s} >= {prev}");
                prev = s;
                t *= 1.3;
            }
        }
    }

    #[test]
    fn small_time_slope_is_stretched_exponential() {
        let p = ml(0.5);
        let (t1, t2) = (1e-4, 1e-3);
        let slope = (ml_pdf(&p, t2).unwrap().ln() - ml_pdf(&p, t1).unwrap().ln()) / (t2 / t1).ln();
        assert!((slope - (0.5 - 1.0)).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn negative_time_rejected() {
        assert!(ml_survival(&ml(0.5), -1.0).is_err());
        assert!(ml_pdf(&ml(0.5), 0.0).is_err());
    }
}
