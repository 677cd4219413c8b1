//! Statistical checks: Kolmogorov-Smirnov tests, histograms with Poisson
//! bands, and rejection and throughput measurement.
//!
//! All thresholds are at the 1% significance level with asymptotic critical
//! values.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::sampler::{ConditionalSampler, SampleError, VariateStream};
use crate::rng::UniformSource;

/// Asymptotic 1% critical value of `√n · D` for the one-sample test.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Smallest sample accepted by the KS routines.
pub const KS_MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidateError {
    #[error("samples must be sorted ascending")]
    Unsorted,
    #[error("need at least {min} samples, got {n}")]
    TooFew { n: usize, min: usize },
    #[error("histogram edges must be finite and strictly increasing")]
    Edges,
    #[error("expected {expected} bin probabilities, got {got}")]
    BinCount { expected: usize, got: usize },
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub n: usize,
    pub d: f64,
    pub critical_1pct: f64,
    pub pass: bool,
}

impl KsResult {
    fn new(n: usize, d: f64, critical: f64) -> Self {
        Self {
            n,
            d,
            critical_1pct: critical,
            pass: d < critical,
        }
    }
}

fn check_sorted(xs: &[f64]) -> Result<(), ValidateError> {
    if xs.len() < KS_MIN_SAMPLES {
        return Err(ValidateError::TooFew {
            n: xs.len(),
            min: KS_MIN_SAMPLES,
        });
    }
    if xs.windows(2).all(|w| w[0] <= w[1]) {
        Ok(())
    } else {
        Err(ValidateError::Unsorted)
    }
}

/// `D = sup |F_n(x) - F(x)|` for sorted `samples` against a model `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult, ValidateError> {
    check_sorted(samples)?;
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - k as f64 / n).max((k + 1) as f64 / n - f);
    }
    Ok(KsResult::new(samples.len(), d, KS_CRITICAL_1PCT / n.sqrt()))
}

/// Two-sample statistic `sup |F_a(x) - F_b(x)|` for sorted inputs, with
/// critical value `1.628 · √((n + m) / (n m))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, ValidateError> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let critical = KS_CRITICAL_1PCT * ((n + m) / (n * m)).sqrt();
    Ok(KsResult::new(a.len().min(b.len()), d, critical))
}

/// Counts per bin; values outside the edges are tallied separately and are
/// not part of `total`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    outside: u64,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self, ValidateError> {
        if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ValidateError::Edges);
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; bins],
            total: 0,
            outside: 0,
        })
    }

    /// `bins` equal bins on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self, ValidateError> {
        let bins = bins.max(1);
        Self::new((0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect())
    }

    /// Bins with the last edge closed.
    pub fn add(&mut self, x: f64) {
        let last = *self.edges.last().expect("at least two edges");
        if !(x >= self.edges[0] && x <= last) {
            self.outside += 1;
            return;
        }
        let k = self.edges.partition_point(|&e| e <= x).saturating_sub(1).min(self.counts.len() - 1);
        self.counts[k] += 1;
        self.total += 1;
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        for x in xs {
            self.add(x);
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn outside(&self) -> u64 {
        self.outside
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCheck {
    pub bins: usize,
    pub within: usize,
    pub fraction: f64,
}

/// Compares each bin count with `n · p_k`, where `p_k` is the model
/// probability of bin `k` and `n` counts all samples including those outside
/// the edges. A bin is within band if `|count - n p_k| <= sigmas · σ` with
/// `σ = √max(n p_k, 1)`.
pub fn poisson_bands(hist: &Histogram, bin_probs: &[f64], sigmas: f64) -> Result<BandCheck, ValidateError> {
    if bin_probs.len() != hist.counts.len() {
        return Err(ValidateError::BinCount {
            expected: hist.counts.len(),
            got: bin_probs.len(),
        });
    }
    let n = (hist.total + hist.outside) as f64;
    let within = hist
        .counts
        .iter()
        .zip(bin_probs)
        .filter(|(&c, &p)| {
            let mu = n * p;
            (c as f64 - mu).abs() <= sigmas * mu.max(1.0).sqrt()
        })
        .count();
    let bins = hist.counts.len();
    Ok(BandCheck {
        bins,
        within,
        fraction: within as f64 / bins as f64,
    })
}

/// Bin probabilities from a distribution function.
pub fn bin_probabilities<F: Fn(f64) -> f64>(edges: &[f64], cdf: F) -> Vec<f64> {
    let f: Vec<f64> = edges.iter().map(|&e| cdf(e)).collect();
    f.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
}

/// Emits `n` variates and returns the fraction of candidates rejected while
/// doing so.
pub fn measure_rejection<S: UniformSource>(s: &mut ConditionalSampler<S>, n: u64) -> Result<f64, ValidateError> {
    let before = s.counters();
    for _ in 0..n {
        s.sample()?;
    }
    let after = s.counters();
    let rejects = after.rejects - before.rejects;
    let all = rejects + (after.accepts - before.accepts) + (after.direct_accepts - before.direct_accepts);
    Ok(if all == 0 { 0.0 } else { rejects as f64 / all as f64 })
}

/// Monotonic time source.
pub trait Clock {
    fn elapsed(&self) -> Duration;
}

/// Wall clock started at construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::start()
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

/// Variates per second over `n` draws. Only meaningful for comparisons on
/// the same machine.
pub fn measure_throughput<V: VariateStream + ?Sized, C: Clock>(s: &mut V, n: u64, clock: &C) -> Result<f64, ValidateError> {
    let t0 = clock.elapsed();
    let mut sink = 0.0;
    for _ in 0..n {
        sink += s.next_variate()?;
    }
    std::hint::black_box(sink);
    let dt = (clock.elapsed() - t0).as_secs_f64();
    Ok(n as f64 / dt.max(f64::MIN_POSITIVE))
}

/// Line-oriented `key=value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
