//! Sumset patterns `{m·b₁ + ℓ·b₂ : (b₁, b₂) ∈ pairs(B)} + t`, inclusion
//! checks against a truncated set, shift bookkeeping, and witness search.

mod certificate;
mod engine;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitBuf;
use crate::error::{Error, Result};
use crate::setkit::Truncation;

pub use certificate::{verify_certificate, Certificate, CertificateCheck, CERTIFICATE_VERSION};
pub use search::{
    best_shift, brute_force_max_b, greedy_extend, max_b_search, resolve_candidate_bound, unshifted_reduction,
    GreedyOrder, SearchConfig, SearchResult, ShiftTable, Strategy, BRUTE_FORCE_MAX_BOUND,
};

/// Which ordered pairs of `B` produce pattern values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `b₁ < b₂`
    Strict,
    /// `b₁ ≤ b₂`
    Weak,
    /// `b₁ ≠ b₂`
    Distinct,
    /// every ordered pair
    All,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::Strict, Relation::Weak, Relation::Distinct, Relation::All];

    pub fn has_diagonal(self) -> bool {
        matches!(self, Relation::Weak | Relation::All)
    }

    pub fn has_reverse(self) -> bool {
        matches!(self, Relation::Distinct | Relation::All)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Strict => "strict",
            Relation::Weak => "weak",
            Relation::Distinct => "distinct",
            Relation::All => "all",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternRepr", into = "PatternRepr")]
pub struct PatternSpec {
    pub m: u64,
    pub l: u64,
    pub relation: Relation,
    pub shift: u64,
    /// Also require `ℓ·b + t ∈ A` for every `b ∈ B`.
    pub dilate: bool,
}

#[derive(Serialize, Deserialize)]
struct PatternRepr {
    m: u64,
    l: u64,
    relation: Relation,
    #[serde(default)]
    shift: u64,
    #[serde(default)]
    dilate: bool,
}

impl TryFrom<PatternRepr> for PatternSpec {
    type Error = Error;
    fn try_from(r: PatternRepr) -> Result<Self> {
        let mut p = PatternSpec::new(r.m, r.l, r.relation)?;
        p.shift = r.shift;
        p.dilate = r.dilate;
        Ok(p)
    }
}

impl From<PatternSpec> for PatternRepr {
    fn from(p: PatternSpec) -> Self {
        PatternRepr {
            m: p.m,
            l: p.l,
            relation: p.relation,
            shift: p.shift,
            dilate: p.dilate,
        }
    }
}

impl PatternSpec {
    pub fn new(m: u64, l: u64, relation: Relation) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::invalid("pattern coefficients m and l must be at least 1"));
        }
        Ok(PatternSpec {
            m,
            l,
            relation,
            shift: 0,
            dilate: false,
        })
    }

    pub fn with_shift(mut self, t: u64) -> Self {
        self.shift = t;
        self
    }

    pub fn with_dilate(mut self, dilate: bool) -> Self {
        self.dilate = dilate;
        self
    }

    pub fn with_relation(mut self, relation: Relation) -> Self {
        self.relation = relation;
        self
    }

    /// `m·b₁ + ℓ·b₂ + t`, or `None` on overflow.
    pub fn value(&self, b1: u64, b2: u64) -> Option<u64> {
        self.m
            .checked_mul(b1)?
            .checked_add(self.l.checked_mul(b2)?)?
            .checked_add(self.shift)
    }

    /// `ℓ·b + t`, or `None` on overflow.
    pub fn dilate_value(&self, b: u64) -> Option<u64> {
        self.l.checked_mul(b)?.checked_add(self.shift)
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}*b1 + {}*b2 + {} ({}{})",
            self.m,
            self.l,
            self.shift,
            self.relation,
            if self.dilate { ", dilate" } else { "" }
        )
    }
}

/// Where a pattern value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    /// `m·b1 + ℓ·b2 + t`
    Pair { b1: u64, b2: u64 },
    /// `ℓ·b + t`
    Dilate { b: u64 },
}

fn check_sorted(b: &[u64]) -> Result<()> {
    if b.first() == Some(&0) {
        return Err(Error::precondition("B must consist of positive integers"));
    }
    if b.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::precondition("B must be sorted and free of duplicates"));
    }
    Ok(())
}

fn overflow() -> Error {
    Error::domain("pattern value overflows u64")
}

/// Calls `f(value, source)` for every generating pair (and dilate term), in
/// the order: pairs by `b1` then `b2` ascending, then dilates.
fn for_each_value(b: &[u64], spec: &PatternSpec, mut f: impl FnMut(u64, ValueSource) -> bool) -> Result<()> {
    for (i, &b1) in b.iter().enumerate() {
        for (j, &b2) in b.iter().enumerate() {
            let take = match spec.relation {
                Relation::Strict => i < j,
                Relation::Weak => i <= j,
                Relation::Distinct => i != j,
                Relation::All => true,
            };
            if take {
                let v = spec.value(b1, b2).ok_or_else(overflow)?;
                if !f(v, ValueSource::Pair { b1, b2 }) {
                    return Ok(());
                }
            }
        }
    }
    if spec.dilate {
        for &x in b {
            let v = spec.dilate_value(x).ok_or_else(overflow)?;
            if !f(v, ValueSource::Dilate { b: x }) {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Sorted, deduplicated pattern values of `B`.
pub fn pattern_values(b: &[u64], spec: &PatternSpec) -> Result<Vec<u64>> {
    check_sorted(b)?;
    let Some(&top) = b.last() else {
        return Ok(Vec::new());
    };
    // the largest value is bounded by (m+ℓ)·max(B) + t
    let cap = spec
        .m
        .checked_add(spec.l)
        .and_then(|s| s.checked_mul(top))
        .and_then(|v| v.checked_add(spec.shift))
        .ok_or_else(overflow)?;
    if cap <= 1 << 28 {
        let mut seen = BitBuf::zeros(cap as usize + 1);
        for_each_value(b, spec, |v, _| {
            seen.set(v as usize);
            true
        })?;
        return Ok(seen.iter_ones().map(|v| v as u64).collect());
    }
    let mut out = Vec::new();
    for_each_value(b, spec, |v, _| {
        out.push(v);
        true
    })?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub value: u64,
    pub source: ValueSource,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionCheck {
    pub holds: bool,
    /// Smallest value outside `A`, with the first pair (in scan order) producing it.
    pub violation: Option<Violation>,
}

/// Whether every pattern value of `B` lies in `A`.
///
/// Values beyond `A.n()` are a range error, never a plain failure.
pub fn check_inclusion(b: &[u64], spec: &PatternSpec, a: &Truncation) -> Result<InclusionCheck> {
    check_sorted(b)?;
    let mut max = 0u64;
    for_each_value(b, spec, |v, _| {
        max = max.max(v);
        true
    })?;
    if max > a.n() {
        return Err(Error::Range {
            value: max,
            limit: a.n(),
        });
    }
    let mut worst: Option<Violation> = None;
    for_each_value(b, spec, |v, source| {
        if !a.contains(v) && worst.is_none_or(|w| v < w.value) {
            worst = Some(Violation { value: v, source });
        }
        true
    })?;
    Ok(InclusionCheck {
        holds: worst.is_none(),
        violation: worst,
    })
}

/// `t = (ℓ+m)·j + i` with `0 ≤ i < ℓ+m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftDecomposition {
    pub j: u64,
    pub i: u64,
}

pub fn normalize_shift(t: u64, l: u64, m: u64) -> ShiftDecomposition {
    let s = l + m;
    ShiftDecomposition { j: t / s, i: t % s }
}

/// Compares the pattern of `B` at shift `t` with that of `B + j` at shift `i`.
///
/// The two value sets are equal as an algebraic identity; `Ok(false)` signals
/// an internal inconsistency. Dilate terms `ℓb + t` do not follow the
/// rewriting, so dilated specs are rejected.
pub fn shift_equivalence_check(b: &[u64], spec: &PatternSpec, a: &Truncation) -> Result<bool> {
    if spec.dilate {
        return Err(Error::precondition(
            "shift normalization applies to pair values only, not dilate terms",
        ));
    }
    let ShiftDecomposition { j, i } = normalize_shift(spec.shift, spec.l, spec.m);
    let moved: Vec<u64> = b
        .iter()
        .map(|&x| x.checked_add(j).ok_or_else(overflow))
        .collect::<Result<_>>()?;
    let reduced = spec.with_shift(i);
    let lhs = check_inclusion(b, spec, a)?;
    let rhs = check_inclusion(&moved, &reduced, a)?;
    let same_values = pattern_values(b, spec)? == pattern_values(&moved, &reduced)?;
    Ok(same_values && lhs == rhs.map_sources(|x| x - j))
}

impl InclusionCheck {
    fn map_sources(self, f: impl Fn(u64) -> u64) -> Self {
        InclusionCheck {
            holds: self.holds,
            violation: self.violation.map(|v| Violation {
                value: v.value,
                source: match v.source {
                    ValueSource::Pair { b1, b2 } => ValueSource::Pair { b1: f(b1), b2: f(b2) },
                    ValueSource::Dilate { b } => ValueSource::Dilate { b: f(b) },
                },
            }),
        }
    }
}

/// Largest residue class of `B` modulo `d` (smallest residue on ties).
pub fn mod_refine(b: &[u64], d: u64) -> Result<Vec<u64>> {
    if d == 0 {
        return Err(Error::domain("modulus must be at least 1"));
    }
    let mut counts = std::collections::BTreeMap::new();
    for &x in b {
        *counts.entry(x % d).or_insert(0usize) += 1;
    }
    let Some(best) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&r, _)| r)
    else {
        return Ok(Vec::new());
    };
    Ok(b.iter().copied().filter(|x| x % d == best).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setkit::{truncate, SetSpec};

    fn spec(m: u64, l: u64, r: Relation) -> PatternSpec {
        PatternSpec::new(m, l, r).unwrap()
    }

    #[test]
    fn values_by_relation() {
        let b = [2, 3, 5];
        assert_eq!(
            pattern_values(&b, &spec(1, 2, Relation::Strict)).unwrap(),
            vec![8, 12, 13]
        );
        assert_eq!(
            pattern_values(&b, &spec(1, 2, Relation::Weak)).unwrap(),
            vec![6, 8, 9, 12, 13, 15]
        );
        assert_eq!(
            pattern_values(&b, &spec(1, 2, Relation::Distinct)).unwrap(),
            vec![7, 8, 9, 11, 12, 13]
        );
        assert_eq!(
            pattern_values(&b, &spec(1, 2, Relation::All)).unwrap(),
            vec![6, 7, 8, 9, 11, 12, 13, 15]
        );
        assert_eq!(
            pattern_values(&b, &spec(1, 2, Relation::Strict).with_dilate(true)).unwrap(),
            vec![4, 6, 8, 10, 12, 13]
        );
        assert!(pattern_values(&[3, 2], &spec(1, 1, Relation::Strict)).is_err());
        assert!(pattern_values(&[2, 2], &spec(1, 1, Relation::Strict)).is_err());
    }

    #[test]
    fn inclusion_examples() {
        let a = truncate(&SetSpec::residue(3, [0]).unwrap(), 100).unwrap();
        assert!(
            check_inclusion(&[3, 6, 9], &spec(1, 2, Relation::Weak), &a)
                .unwrap()
                .holds
        );

        let a = truncate(&SetSpec::residue(2, [0]).unwrap(), 10).unwrap();
        let c = check_inclusion(&[1, 2], &spec(1, 1, Relation::Strict), &a).unwrap();
        assert!(!c.holds);
        assert_eq!(
            c.violation,
            Some(Violation {
                value: 3,
                source: ValueSource::Pair { b1: 1, b2: 2 }
            })
        );

        let a = truncate(&SetSpec::explicit([13]).unwrap(), 20).unwrap();
        let p = spec(1, 2, Relation::Weak).with_shift(1);
        assert!(check_inclusion(&[4], &p, &a).unwrap().holds);
        assert!(matches!(
            check_inclusion(&[7], &p, &a),
            Err(Error::Range { value: 22, limit: 20 })
        ));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(normalize_shift(7, 1, 2), ShiftDecomposition { j: 2, i: 1 });
        assert_eq!(normalize_shift(0, 4, 4), ShiftDecomposition { j: 0, i: 0 });
        assert_eq!(normalize_shift(5, 2, 3), ShiftDecomposition { j: 1, i: 0 });
        let a = truncate(&SetSpec::residue(7, [0, 1]).unwrap(), 200).unwrap();
        let p = spec(2, 3, Relation::Strict).with_shift(11);
        assert!(shift_equivalence_check(&[2, 5], &p, &a).unwrap());
        assert!(shift_equivalence_check(&[], &p, &a).unwrap());
    }

    #[test]
    fn refine_examples() {
        assert_eq!(mod_refine(&[1, 4, 7, 9, 10, 13], 3).unwrap(), vec![1, 4, 7, 10, 13]);
        assert_eq!(mod_refine(&[1, 2], 5).unwrap(), vec![1]);
        assert_eq!(mod_refine(&[], 5).unwrap(), Vec::<u64>::new());
        let v = pattern_values(&[2, 5, 8], &spec(1, 2, Relation::Strict)).unwrap();
        assert_eq!(v, vec![12, 18, 21]);
    }

    #[test]
    fn pattern_toml() {
        let p: PatternSpec = toml::from_str("m = 1\nl = 2\nrelation = \"weak\"").unwrap();
        assert_eq!(p, spec(1, 2, Relation::Weak));
        assert!(toml::from_str::<PatternSpec>("m = 0\nl = 2\nrelation = \"weak\"").is_err());
    }
}
