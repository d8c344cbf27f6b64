//! Exact finite-scale densities along window sequences, sliding-window
//! (Banach-type) estimates, and closed-form density thresholds.
//!
//! Upper and lower densities are limits and cannot be computed; the reports
//! here keep the whole curve and expose tail maxima/minima as estimates.

mod thresholds;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setkit::{IntervalFamily, Truncation};

pub use thresholds::{golden_ratio_comparison, threshold, DensityNotion, GoldenComparison, ThresholdId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSequence {
    /// Every endpoint `1..=n`.
    Prefixes {
        n: u64,
    },
    /// `⌊(β − 1/i)·β^{2i}⌋` for `i = 1..=count`; endpoints below 1 are dropped
    /// and repeats collapsed.
    Family {
        #[serde(with = "rational::serde_str")]
        base: Rational,
        count: u64,
    },
    Explicit {
        endpoints: Vec<u64>,
    },
}

impl WindowSequence {
    pub fn family_windows(base: Rational, count: u64) -> Self {
        WindowSequence::Family { base, count }
    }

    /// Family windows for `family`'s own base.
    pub fn for_family(family: &IntervalFamily, count: u64) -> Self {
        Self::family_windows(family.base().clone(), count)
    }

    pub fn endpoints(&self) -> Result<Vec<u64>> {
        let eps = match self {
            WindowSequence::Prefixes { n } => (1..=*n).collect(),
            WindowSequence::Family { base, count } => {
                if *base <= Rational::one() {
                    return Err(Error::invalid("window base must exceed 1"));
                }
                let mut out: Vec<u64> = Vec::new();
                for i in 1..=*count {
                    let e = family_endpoint(base, i);
                    if e >= 1 && out.last().is_none_or(|&l| e > l) {
                        out.push(e);
                    }
                }
                out
            }
            WindowSequence::Explicit { endpoints } => {
                if endpoints.first() == Some(&0) {
                    return Err(Error::invalid("window endpoints must be positive"));
                }
                if endpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("window endpoints must be strictly increasing"));
                }
                endpoints.clone()
            }
        };
        if eps.is_empty() {
            return Err(Error::invalid("window sequence has no endpoints"));
        }
        Ok(eps)
    }

    /// Largest endpoint, i.e. the truncation length the sequence needs.
    pub fn horizon(&self) -> Result<u64> {
        Ok(*self.endpoints()?.last().expect("endpoints are nonempty"))
    }
}

/// `⌊(β − 1/i)·β^{2i}⌋`, saturating at `u64::MAX`.
pub fn family_endpoint(base: &Rational, i: u64) -> u64 {
    let inv = Rational::new(BigInt::one(), BigInt::from(i));
    let v = (base - inv) * num_traits::pow(base.clone(), 2 * i as usize);
    rational::saturating_u64(&rational::floor_int(&v))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityPoint {
    pub endpoint: u64,
    pub count: u64,
    pub ratio: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BanachEstimate {
    pub length: u64,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub points: Vec<DensityPoint>,
    /// Index into `points` where the tail used for the estimates begins.
    pub tail_start: usize,
    pub upper_estimate: Rational,
    pub lower_estimate: Rational,
    pub banach: Option<BanachEstimate>,
}

impl DensityReport {
    /// Running maximum of the ratios, one entry per point.
    pub fn running_max(&self) -> Vec<Rational> {
        let mut cur: Option<Rational> = None;
        self.points
            .iter()
            .map(|p| {
                let next = match cur.take() {
                    Some(c) if c >= p.ratio => c,
                    _ => p.ratio.clone(),
                };
                cur = Some(next.clone());
                next
            })
            .collect()
    }

    pub fn running_min(&self) -> Vec<Rational> {
        let mut cur: Option<Rational> = None;
        self.points
            .iter()
            .map(|p| {
                let next = match cur.take() {
                    Some(c) if c <= p.ratio => c,
                    _ => p.ratio.clone(),
                };
                cur = Some(next.clone());
                next
            })
            .collect()
    }

    pub fn last(&self) -> &DensityPoint {
        self.points.last().expect("reports are never empty")
    }

    /// Tab-separated curve: endpoint, count, 12-digit decimal ratio, exact ratio.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("endpoint\tcount\tratio_decimal\tratio_exact\n");
        for p in &self.points {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                p.endpoint,
                p.count,
                rational::format_decimal(&p.ratio, 12),
                rational::format_fraction(&p.ratio)
            ));
        }
        s
    }
}

/// Density curve with the default tail (the last half of the endpoints).
pub fn density_curve(trunc: &Truncation, windows: &WindowSequence) -> Result<DensityReport> {
    density_curve_with_tail(trunc, windows, &rational::rat(1, 2))
}

pub fn density_curve_with_tail(
    trunc: &Truncation,
    windows: &WindowSequence,
    tail_fraction: &Rational,
) -> Result<DensityReport> {
    if *tail_fraction <= Rational::zero() || *tail_fraction > Rational::one() {
        return Err(Error::domain("tail fraction must lie in (0, 1]"));
    }
    let endpoints = windows.endpoints()?;
    let last = *endpoints.last().expect("nonempty");
    if last > trunc.n() {
        return Err(Error::precondition(format!(
            "window endpoint {last} exceeds truncation length {}",
            trunc.n()
        )));
    }
    let points: Vec<DensityPoint> = endpoints
        .iter()
        .map(|&e| {
            let count = trunc.count_upto(e);
            DensityPoint {
                endpoint: e,
                count,
                ratio: rational::ratio(count, e),
            }
        })
        .collect();
    let len = points.len();
    let tail_len = rational::ceil_int(&(rational::from_u64(len as u64) * tail_fraction));
    let tail_len = (rational::saturating_u64(&tail_len) as usize).clamp(1, len);
    let tail_start = len - tail_len;
    let tail = &points[tail_start..];
    let upper = tail.iter().map(|p| &p.ratio).max().expect("nonempty").clone();
    let lower = tail.iter().map(|p| &p.ratio).min().expect("nonempty").clone();
    Ok(DensityReport {
        points,
        tail_start,
        upper_estimate: upper,
        lower_estimate: lower,
        banach: None,
    })
}

/// `max_M |A ∩ [M+1, M+L]| / L` over all windows inside `[1, N]`.
pub fn banach_density_estimate(trunc: &Truncation, length: u64) -> Result<Rational> {
    let n = trunc.n();
    if length == 0 || length > n {
        return Err(Error::precondition(format!(
            "window length {length} must lie in [1, {n}]"
        )));
    }
    let bits = trunc.bits();
    let l = length as usize;
    let mut cur = bits.count_range(0, l);
    let mut best = cur;
    for m in 1..=(n as usize - l) {
        cur = cur + bits.get(m + l - 1) as u64 - bits.get(m - 1) as u64;
        best = best.max(cur);
    }
    Ok(rational::ratio(best, length))
}

/// `β/(β+1)`.
pub fn analytic_family_density(family: &IntervalFamily) -> Rational {
    family.analytic_density()
}
