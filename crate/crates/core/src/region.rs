//! Sampling regions: ordered unions of disjoint intervals on the extended
//! real line, with a small text grammar:
//!
//! ```text
//! (-inf,-12]
//! [-0.5, 0.5]
//! (-inf,-1] U [1,inf)
//! ```
//!
//! Brackets mark closed endpoints, parentheses open ones. `inf` / `-inf`
//! endpoints are always unbounded regardless of the bracket used.

use std::fmt;
use std::ops::Bound;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("region must contain at least one interval")]
    Empty,
    #[error("interval endpoints must satisfy lo < hi (got {0})")]
    Inverted(String),
    #[error("endpoint is not a number")]
    Nan,
    #[error("intervals must be sorted and pairwise disjoint ({0} and {1})")]
    Overlap(String, String),
    #[error("cannot parse region {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// One interval; each end is unbounded, closed or open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: Bound<f64>,
    hi: Bound<f64>,
}

fn bound_value(b: Bound<f64>) -> Option<f64> {
    match b {
        Bound::Included(x) | Bound::Excluded(x) => Some(x),
        Bound::Unbounded => None,
    }
}

impl Interval {
    pub fn new(lo: Bound<f64>, hi: Bound<f64>) -> Result<Self, RegionError> {
        let iv = Self { lo, hi };
        for v in [bound_value(lo), bound_value(hi)].into_iter().flatten() {
            if v.is_nan() {
                return Err(RegionError::Nan);
            }
        }
        if let (Some(a), Some(b)) = (bound_value(lo), bound_value(hi)) {
            if !(a < b) {
                return Err(RegionError::Inverted(iv.to_string()));
            }
        }
        Ok(iv)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self, RegionError> {
        Self::new(Bound::Included(lo), Bound::Included(hi))
    }

    pub fn lo(&self) -> Bound<f64> {
        self.lo
    }

    pub fn hi(&self) -> Bound<f64> {
        self.hi
    }

    /// Finite endpoint values, `-inf`/`inf` for unbounded ends.
    pub fn endpoints(&self) -> (f64, f64) {
        (
            bound_value(self.lo).unwrap_or(f64::NEG_INFINITY),
            bound_value(self.hi).unwrap_or(f64::INFINITY),
        )
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lo {
            Bound::Unbounded => true,
            Bound::Included(a) => x >= a,
            Bound::Excluded(a) => x > a,
        };
        let below = match self.hi {
            Bound::Unbounded => true,
            Bound::Included(b) => x <= b,
            Bound::Excluded(b) => x < b,
        };
        above && below
    }

    fn is_full_line(&self) -> bool {
        self.lo == Bound::Unbounded && self.hi == Bound::Unbounded
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Bound::Unbounded => write!(f, "(-inf")?,
            Bound::Included(a) => write!(f, "[{a}")?,
            Bound::Excluded(a) => write!(f, "({a}")?,
        }
        match self.hi {
            Bound::Unbounded => write!(f, ",inf)"),
            Bound::Included(b) => write!(f, ",{b}]"),
            Bound::Excluded(b) => write!(f, ",{b})"),
        }
    }
}

/// A sorted union of pairwise disjoint intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    intervals: Vec<Interval>,
}

impl RegionSpec {
    pub fn new(intervals: Vec<Interval>) -> Result<Self, RegionError> {
        if intervals.is_empty() {
            return Err(RegionError::Empty);
        }
        for pair in intervals.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let disjoint = match (bound_value(a.hi), bound_value(b.lo)) {
                (Some(x), Some(y)) => {
                    x < y
                        || (x == y
                            && (matches!(a.hi, Bound::Excluded(_))
                                || matches!(b.lo, Bound::Excluded(_))))
                }
                _ => false,
            };
            if !disjoint {
                return Err(RegionError::Overlap(a.to_string(), b.to_string()));
            }
        }
        Ok(Self { intervals })
    }

    /// `(-inf, x]`
    pub fn below(x: f64) -> Result<Self, RegionError> {
        Self::new(vec![Interval::new(Bound::Unbounded, Bound::Included(x))?])
    }

    /// `[x, inf)`
    pub fn above(x: f64) -> Result<Self, RegionError> {
        Self::new(vec![Interval::new(Bound::Included(x), Bound::Unbounded)?])
    }

    /// `[lo, hi]`
    pub fn between(lo: f64, hi: f64) -> Result<Self, RegionError> {
        Self::new(vec![Interval::closed(lo, hi)?])
    }

    pub fn full_line() -> Self {
        Self {
            intervals: vec![Interval {
                lo: Bound::Unbounded,
                hi: Bound::Unbounded,
            }],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// The whole line is allowed but makes tiling degenerate: every tile
    /// is kept.
    pub fn is_full_line(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0].is_full_line()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Index of the interval containing `x`.
    #[inline]
    pub fn interval_of(&self, x: f64) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.contains(x))
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(" U ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

enum Endpoint {
    NegInf,
    PosInf,
    Finite(f64),
}

fn parse_endpoint(s: &str) -> Option<Endpoint> {
    match s.to_ascii_lowercase().as_str() {
        "-inf" => Some(Endpoint::NegInf),
        "inf" | "+inf" => Some(Endpoint::PosInf),
        t => {
            let x: f64 = t.parse().ok()?;
            x.is_finite().then_some(Endpoint::Finite(x))
        }
    }
}

fn parse_interval(text: &str) -> Result<Interval, String> {
    let open_lo = match text.chars().next() {
        Some('[') => false,
        Some('(') => true,
        _ => return Err(format!("interval {text:?} must start with '[' or '('")),
    };
    let open_hi = match text.chars().last() {
        Some(']') => false,
        Some(')') => true,
        _ => return Err(format!("interval {text:?} must end with ']' or ')'")),
    };
    let inner = &text[1..text.len() - 1];
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| format!("interval {text:?} needs two comma-separated endpoints"))?;
    let lo = match parse_endpoint(a).ok_or_else(|| format!("bad endpoint {a:?}"))? {
        Endpoint::NegInf => Bound::Unbounded,
        Endpoint::PosInf => return Err("lower endpoint cannot be +inf".into()),
        Endpoint::Finite(x) if open_lo => Bound::Excluded(x),
        Endpoint::Finite(x) => Bound::Included(x),
    };
    let hi = match parse_endpoint(b).ok_or_else(|| format!("bad endpoint {b:?}"))? {
        Endpoint::PosInf => Bound::Unbounded,
        Endpoint::NegInf => return Err("upper endpoint cannot be -inf".into()),
        Endpoint::Finite(x) if open_hi => Bound::Excluded(x),
        Endpoint::Finite(x) => Bound::Included(x),
    };
    Interval::new(lo, hi).map_err(|e| e.to_string())
}

impl FromStr for RegionSpec {
    type Err = RegionError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let fail = |reason: String| RegionError::Parse {
            input: input.to_string(),
            reason,
        };
        if compact.is_empty() {
            return Err(fail("empty expression".into()));
        }
        // 'U' only ever appears as the union separator; the endpoint
        // keywords are lower-case.
        let intervals = compact
            .split(['U', 'u'])
            .map(|part| {
                if part.is_empty() {
                    Err(fail("empty union member".into()))
                } else {
                    parse_interval(part).map_err(fail)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        RegionSpec::new(intervals)
    }
}
