//! The explicit counterexample sets, their blocking and gap structure, and
//! growth curves of finite witnesses on them.
//!
//! Everything here is bounded evidence: a clean blocking scan or a flat
//! growth curve says nothing about integers beyond the scanned range.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{threshold, DensityNotion, ThresholdId};
use crate::error::{Error, Result};
use crate::patterns::{best_shift, PatternSpec, Relation, SearchConfig, Strategy};
use crate::rational::{self, Rational};
use crate::setkit::{truncate_with_budget, IntervalFamily, MemoryBudget, SetSpec, Truncation};

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Construction {
    P51_A,
    P51_APRIME,
    P66_A,
    P66_APRIME,
    P71_A,
    P71_APRIME,
    P75_A,
    P75_APRIME,
}

impl Construction {
    pub const ALL: [Construction; 8] = [
        Construction::P51_A,
        Construction::P51_APRIME,
        Construction::P66_A,
        Construction::P66_APRIME,
        Construction::P71_A,
        Construction::P71_APRIME,
        Construction::P75_A,
        Construction::P75_APRIME,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::P51_A => "P51_A",
            Construction::P51_APRIME => "P51_APRIME",
            Construction::P66_A => "P66_A",
            Construction::P66_APRIME => "P66_APRIME",
            Construction::P71_A => "P71_A",
            Construction::P71_APRIME => "P71_APRIME",
            Construction::P75_A => "P75_A",
            Construction::P75_APRIME => "P75_APRIME",
        }
    }

    /// Sets built on the base `ℓ/m` instead of `(ℓ+m)/ℓ`; these need `ℓ > m`.
    pub fn needs_l_gt_m(self) -> bool {
        matches!(
            self,
            Construction::P71_A | Construction::P71_APRIME | Construction::P75_A | Construction::P75_APRIME
        )
    }

    /// The primed sets block unshifted patterns only.
    pub fn is_primed(self) -> bool {
        matches!(
            self,
            Construction::P51_APRIME | Construction::P66_APRIME | Construction::P71_APRIME | Construction::P75_APRIME
        )
    }

    /// Pair regime the set is built to block.
    pub fn relation(self) -> Relation {
        if self.needs_l_gt_m() {
            Relation::Distinct
        } else {
            Relation::Weak
        }
    }

    /// Threshold whose value the set's density attains.
    pub fn threshold_id(self) -> ThresholdId {
        match self {
            Construction::P51_A => ThresholdId::T1_7,
            Construction::P51_APRIME => ThresholdId::T1_8,
            Construction::P66_A => ThresholdId::C6_5_1,
            Construction::P66_APRIME => ThresholdId::C6_5_2,
            Construction::P71_A => ThresholdId::P7_1_A,
            Construction::P71_APRIME => ThresholdId::P7_1_Aprime,
            Construction::P75_A => ThresholdId::P7_5,
            Construction::P75_APRIME => ThresholdId::P7_5_Aprime,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Construction::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown family {s:?}")))
    }
}

/// A construction together with its `(ℓ, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyIdRepr", into = "FamilyIdRepr")]
pub struct FamilyId {
    construction: Construction,
    l: u64,
    m: u64,
}

#[derive(Serialize, Deserialize)]
struct FamilyIdRepr {
    family: String,
    l: u64,
    m: u64,
}

impl TryFrom<FamilyIdRepr> for FamilyId {
    type Error = Error;
    fn try_from(r: FamilyIdRepr) -> Result<Self> {
        FamilyId::new(r.family.parse()?, r.l, r.m)
    }
}

impl From<FamilyId> for FamilyIdRepr {
    fn from(id: FamilyId) -> Self {
        FamilyIdRepr {
            family: id.construction.name().to_string(),
            l: id.l,
            m: id.m,
        }
    }
}

impl FamilyId {
    pub fn new(construction: Construction, l: u64, m: u64) -> Result<Self> {
        if l == 0 || m == 0 {
            return Err(Error::invalid(format!("{construction} needs l, m >= 1")));
        }
        if construction.needs_l_gt_m() && l <= m {
            return Err(Error::invalid(format!("{construction} needs l > m, got l={l}, m={m}")));
        }
        Ok(FamilyId { construction, l, m })
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `(ℓ+m)/ℓ = k+1` for the P51/P66 sets, `ℓ/m` for P71/P75.
    pub fn base(&self) -> Rational {
        if self.construction.needs_l_gt_m() {
            rational::rat(self.l as i64, self.m as i64)
        } else {
            rational::rat((self.l + self.m) as i64, self.l as i64)
        }
    }

    /// Which density the target refers to, and its exact value.
    pub fn target_density(&self) -> (DensityNotion, Rational) {
        let id = self.construction.threshold_id();
        let v = threshold(id, self.l, self.m).expect("parameters validated at construction");
        (id.notion(), v)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(l={}, m={})", self.construction, self.l, self.m)
    }
}

fn lower_family(base: &Rational) -> SetSpec {
    SetSpec::family(IntervalFamily::lower(base.clone()).expect("family bases exceed 1"))
}

fn upper_family(base: &Rational) -> SetSpec {
    SetSpec::family(IntervalFamily::upper(base.clone()).expect("family bases exceed 1"))
}

fn residue(modulus: u64, r: u64) -> SetSpec {
    SetSpec::residue(modulus, [r]).expect("residue below modulus")
}

fn union(children: Vec<SetSpec>) -> SetSpec {
    SetSpec::union(children).expect("nonempty union")
}

fn intersection(children: Vec<SetSpec>) -> SetSpec {
    SetSpec::intersection(children).expect("nonempty intersection")
}

pub fn build_counterexample(id: &FamilyId) -> SetSpec {
    let base = id.base();
    let s = id.l + id.m;
    let a1 = lower_family(&base);
    let a2 = upper_family(&base);
    match id.construction {
        Construction::P51_A | Construction::P71_A => a1,
        Construction::P51_APRIME | Construction::P71_APRIME => union(vec![a1, SetSpec::complement(residue(s, 0))]),
        Construction::P66_A | Construction::P75_A => union(vec![
            intersection(vec![a1, residue(2, 0)]),
            intersection(vec![a2, residue(2, 1)]),
        ]),
        Construction::P66_APRIME | Construction::P75_APRIME => union(vec![
            SetSpec::difference(a1, residue(2 * s, 0)),
            SetSpec::difference(a2, residue(2 * s, s)),
        ]),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockingViolation {
    pub t: u64,
    pub b1: u64,
    pub b: u64,
    /// The value assumed in `A`: `(ℓ+m)b + t` (P51) or `m·b1 + ℓ·b + t` (P71).
    pub anchor: u64,
    /// The value the proof forces into a gap, found in `A` as well.
    pub blocked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockingReport {
    pub family: FamilyId,
    pub t_max: u64,
    pub b1_max: u64,
    pub start: u64,
    pub end: u64,
    /// Largest displacement the gap must absorb, on the `β^{2n}` scale.
    pub reach: Rational,
    /// Smallest interval index from which every gap margin exceeds `reach`.
    pub safe_index: u64,
    /// Smallest `b` whose anchor value lands at or beyond interval `safe_index`.
    pub safe_start: u64,
    /// Number of `(b, t[, b1])` combinations whose anchor lies in `A`.
    pub anchors_checked: u64,
    pub violations: Vec<BlockingViolation>,
}

impl BlockingReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("t\tb1\tb\tanchor\tblocked\n");
        for v in &self.violations {
            s.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", v.t, v.b1, v.b, v.anchor, v.blocked));
        }
        s
    }
}

/// Gap margin `β^{2p−1}/p` between the end of interval `p` (rescaled by `1/β`)
/// and the start of interval `p`.
fn gap_margin(base: &Rational, p: u64) -> Rational {
    num_traits::pow(base.clone(), (2 * p - 1) as usize) / rational::from_u64(p)
}

/// Smallest `n₀` with `β^{2p−1}/p > reach` for every `p ≥ n₀`.
///
/// The margin is increasing once `p(β² − 1) ≥ 1`, so the search walks up to
/// the first passing index past that point and then back down while the
/// condition keeps holding.
pub fn safe_index(base: &Rational, reach: &Rational) -> u64 {
    let sq = base * base;
    let growth = &sq - Rational::one();
    let p_inc = rational::saturating_u64(&rational::ceil_int(&(Rational::one() / growth))).max(1);
    let mut p = p_inc;
    while gap_margin(base, p) <= *reach {
        p += 1;
    }
    while p > 1 && gap_margin(base, p - 1) > *reach {
        p -= 1;
    }
    p
}

fn blocking_bounds(id: &FamilyId, t_max: u64, b1_max: u64) -> Result<(Rational, u64, u64)> {
    let base = id.base();
    let (l, m) = (rational::from_u64(id.l), rational::from_u64(id.m));
    let (b1, t) = (rational::from_u64(b1_max), rational::from_u64(t_max));
    let (reach, divisor) = match id.construction {
        // m·b1 + ℓb + t against (ℓ+m)b + t: the anchor rescales by 1/β = ℓ/(ℓ+m)
        Construction::P51_A => (&m * &b1 + &t, id.l + id.m),
        // β' + t = (α + t)/β + ((ℓ²/m − m)·b1 + t(ℓ/m − 1))/(ℓ/m)
        Construction::P71_A => {
            let c = (&l * &l / &m - &m) * &b1;
            ((c + &t * (&base - Rational::one())) / &base, id.l)
        }
        other => {
            return Err(Error::precondition(format!(
                "blocking scans apply to P51_A and P71_A, not {other}"
            )))
        }
    };
    let n0 = safe_index(&base, &reach);
    let anchor = num_traits::pow(base, 2 * n0 as usize);
    let start = rational::ceil_int(&(anchor / rational::from_u64(divisor)));
    let start = u64::try_from(start).map_err(|_| Error::Range {
        value: u64::MAX,
        limit: u64::MAX,
    })?;
    Ok((reach, n0, start.max(1)))
}

/// Exhaustive check over `b ∈ [start, end]` that every anchor value in `A`
/// forces its partner value out of `A`.
///
/// P51: anchor `(ℓ+m)b + t`, partner `m·b1 + ℓb + t` for `b1 ≤ min(b1_max, b)`.
/// P71: anchor `m·b1 + ℓb + t`, partner `m·b + ℓ·b1 + t` for `b1 ≤ b1_max`, `b1 ≠ b`.
pub fn blocking_scan(
    id: &FamilyId,
    t_max: u64,
    b1_max: u64,
    start: u64,
    end: u64,
    budget: &MemoryBudget,
) -> Result<BlockingReport> {
    if b1_max == 0 {
        return Err(Error::precondition("b1_max must be at least 1"));
    }
    let (reach, n0, safe_start) = blocking_bounds(id, t_max, b1_max)?;
    if start < safe_start {
        return Err(Error::precondition(format!(
            "scan start {start} lies below the safe bound {safe_start} \
             (safe interval index n0={n0}: beta^(2p-1)/p > {} for all p >= {n0})",
            rational::format_fraction(&reach)
        )));
    }
    if end < start {
        return Err(Error::precondition(format!("empty scan range [{start}, {end}]")));
    }
    let (l, m) = (id.l, id.m);
    // every anchor and partner is at most (ℓ+m)·max(b1_max, end) + t_max
    let top = (l + m)
        .checked_mul(b1_max.max(end))
        .and_then(|v| v.checked_add(t_max))
        .ok_or_else(|| Error::domain("scan range overflows u64"))?;
    let a = truncate_with_budget(&build_counterexample(id), top, budget)?;

    const CHUNK: u64 = 4096;
    let chunks: Vec<(u64, u64)> = (start..=end)
        .step_by(CHUNK as usize)
        .map(|lo| (lo, (lo + CHUNK - 1).min(end)))
        .collect();
    let parts: Vec<(u64, Vec<BlockingViolation>)> = chunks
        .par_iter()
        .map(|&(lo, hi)| scan_chunk(&a, id, t_max, b1_max, lo, hi))
        .collect();
    let mut anchors_checked = 0;
    let mut violations = Vec::new();
    for (c, v) in parts {
        anchors_checked += c;
        violations.extend(v);
    }
    Ok(BlockingReport {
        family: *id,
        t_max,
        b1_max,
        start,
        end,
        reach,
        safe_index: n0,
        safe_start,
        anchors_checked,
        violations,
    })
}

fn scan_chunk(
    a: &Truncation,
    id: &FamilyId,
    t_max: u64,
    b1_max: u64,
    lo: u64,
    hi: u64,
) -> (u64, Vec<BlockingViolation>) {
    let (l, m) = (id.l, id.m);
    let mut checked = 0;
    let mut out = Vec::new();
    for b in lo..=hi {
        for t in 0..=t_max {
            match id.construction {
                Construction::P51_A => {
                    let anchor = (l + m) * b + t;
                    if !a.contains(anchor) {
                        continue;
                    }
                    checked += 1;
                    for b1 in 1..=b1_max.min(b) {
                        let blocked = m * b1 + l * b + t;
                        if a.contains(blocked) {
                            out.push(BlockingViolation {
                                t,
                                b1,
                                b,
                                anchor,
                                blocked,
                            });
                        }
                    }
                }
                _ => {
                    for b1 in (1..=b1_max).filter(|&b1| b1 != b) {
                        let anchor = m * b1 + l * b + t;
                        if !a.contains(anchor) {
                            continue;
                        }
                        checked += 1;
                        let blocked = m * b + l * b1 + t;
                        if a.contains(blocked) {
                            out.push(BlockingViolation {
                                t,
                                b1,
                                b,
                                anchor,
                                blocked,
                            });
                        }
                    }
                }
            }
        }
    }
    (checked, out)
}

/// Smallest scan start accepted by [`blocking_scan`], with its interval index.
pub fn blocking_safe_start(id: &FamilyId, t_max: u64, b1_max: u64) -> Result<(u64, u64)> {
    let (_, n0, start) = blocking_bounds(id, t_max, b1_max)?;
    Ok((n0, start))
}

/// `|[1, N] ∖ (A₁ ∪ A₂)| / N` for the lower and upper interval families on
/// base `(ℓ+m)/ℓ`.
pub fn gap_density_check(l: u64, m: u64, n: u64, budget: &MemoryBudget) -> Result<Rational> {
    if l == 0 || m == 0 {
        return Err(Error::domain("l and m must be at least 1"));
    }
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let base = rational::rat((l + m) as i64, l as i64);
    let gap = SetSpec::complement(union(vec![lower_family(&base), upper_family(&base)]));
    let t = truncate_with_budget(&gap, n, budget)?;
    Ok(rational::ratio(t.count(), n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalityRow {
    pub n: u64,
    pub shift: u64,
    pub candidate_bound: u64,
    pub size: usize,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalityReport {
    pub label: String,
    pub relation: Relation,
    /// Rows ordered by `N`, then by shift.
    pub rows: Vec<OptimalityRow>,
}

impl OptimalityReport {
    /// Largest witness found at `n` over all shifts.
    pub fn max_size_at(&self, n: u64) -> Option<usize> {
        self.rows.iter().filter(|r| r.n == n).map(|r| r.size).max()
    }

    pub fn all_optimal(&self) -> bool {
        self.rows.iter().all(|r| r.optimal)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("n\tshift\tcandidate_bound\tsize\toptimal\tnodes\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.n, r.shift, r.candidate_bound, r.size, r.optimal, r.nodes
            ));
        }
        s
    }
}

/// Branch-and-bound witness sizes for `set` along `schedule`, one row per
/// `(N, t)` with `t` ranging over `shifts`.
pub fn growth_curve(
    label: &str,
    set: &SetSpec,
    pattern: &PatternSpec,
    schedule: &[u64],
    shifts: &[u64],
    config: &SearchConfig,
    budget: &MemoryBudget,
) -> Result<OptimalityReport> {
    if schedule.is_empty() || shifts.is_empty() {
        return Err(Error::precondition("schedule and shift list must be nonempty"));
    }
    let mut rows = Vec::new();
    for &n in schedule {
        let a = truncate_with_budget(set, n, budget)?;
        let table = best_shift(&a, pattern, Some(shifts), config, Strategy::BranchAndBound)?;
        rows.extend(table.rows.into_iter().map(|(t, r)| OptimalityRow {
            n,
            shift: t,
            candidate_bound: r.candidate_bound,
            size: r.size(),
            optimal: r.optimal,
            nodes: r.nodes_expanded,
        }));
    }
    Ok(OptimalityReport {
        label: label.to_string(),
        relation: pattern.relation,
        rows,
    })
}

/// Growth curve of a counterexample set, over shifts `0..ℓ+m` plus `extra_shifts`.
///
/// P51/P66 sets accept WEAK or ALL, P71/P75 sets DISTINCT or ALL.
pub fn optimality_report(
    id: &FamilyId,
    relation: Relation,
    schedule: &[u64],
    extra_shifts: &[u64],
    config: &SearchConfig,
    budget: &MemoryBudget,
) -> Result<OptimalityReport> {
    let native = id.construction.relation();
    if relation != native && relation != Relation::All {
        return Err(Error::precondition(format!(
            "{} blocks {native} (or all) pairs, not {relation}",
            id.construction
        )));
    }
    let mut shifts: Vec<u64> = (0..id.l + id.m).chain(extra_shifts.iter().copied()).collect();
    shifts.sort_unstable();
    shifts.dedup();
    let pattern = PatternSpec::new(id.m, id.l, relation)?;
    growth_curve(
        &id.to_string(),
        &build_counterexample(id),
        &pattern,
        schedule,
        &shifts,
        config,
        budget,
    )
}
