use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setkit::{truncate_with_budget, MemoryBudget, SetSpec, Truncation};

use super::engine::{Direction, Masks};
use super::{check_inclusion, pattern_values, PatternSpec};

/// Largest candidate bound the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_BOUND: u64 = 22;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyOrder {
    /// Append the smallest admissible candidate above `max(B)`.
    #[default]
    SmallestFirst,
    /// Build `B` downward from the largest admissible candidate.
    LargestFirst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest element allowed in `B`. Defaults to `⌊(N − t)/(m + ℓ)⌋`.
    pub candidate_bound: Option<u64>,
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
    pub greedy_order: GreedyOrder,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            candidate_bound: None,
            node_budget: 100_000_000,
            time_budget: None,
            greedy_order: GreedyOrder::SmallestFirst,
        }
    }
}

impl SearchConfig {
    pub fn with_bound(mut self, bound: u64) -> Self {
        self.candidate_bound = Some(bound);
        self
    }

    pub fn with_node_budget(mut self, nodes: u64) -> Self {
        self.node_budget = nodes;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    BranchAndBound,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub spec: PatternSpec,
    pub strategy: Strategy,
    pub candidate_bound: u64,
    /// The witness, sorted.
    pub b: Vec<u64>,
    /// True iff no larger witness exists within the candidate bound.
    pub optimal: bool,
    pub nodes_expanded: u64,
    /// Every pattern value of `b`, sorted, each verified to lie in `A`.
    pub values: Vec<u64>,
}

impl SearchResult {
    pub fn size(&self) -> usize {
        self.b.len()
    }
}

/// Candidate bound for `spec` over `[1, n]`, validating an explicit override.
pub fn resolve_candidate_bound(n: u64, spec: &PatternSpec, config: &SearchConfig) -> Result<u64> {
    let width = spec.m + spec.l;
    match config.candidate_bound {
        None => Ok(n.saturating_sub(spec.shift) / width),
        Some(b) => {
            let top = b.checked_mul(width).and_then(|v| v.checked_add(spec.shift));
            match top {
                Some(v) if v <= n => Ok(b),
                _ => Err(Error::precondition(format!(
                    "candidate bound {b} puts pattern values up to {}·{b}+{} beyond N={n}",
                    width, spec.shift
                ))),
            }
        }
    }
}

fn finish(
    a: &Truncation,
    spec: &PatternSpec,
    strategy: Strategy,
    bound: u64,
    b: Vec<u64>,
    optimal: bool,
    nodes: u64,
) -> Result<SearchResult> {
    let check = check_inclusion(&b, spec, a)?;
    if !check.holds {
        return Err(Error::precondition(format!(
            "internal error: {strategy:?} produced a witness violating the pattern at {:?}",
            check.violation
        )));
    }
    Ok(SearchResult {
        spec: *spec,
        strategy,
        candidate_bound: bound,
        values: pattern_values(&b, spec)?,
        b,
        optimal,
        nodes_expanded: nodes,
    })
}

/// Greedy witness construction; a lower bound, never marked optimal.
pub fn greedy_extend(a: &Truncation, spec: &PatternSpec, config: &SearchConfig) -> Result<SearchResult> {
    let bound = resolve_candidate_bound(a.n(), spec, config)?;
    let mut b = Vec::new();
    let mut steps = 0;
    if bound > 0 {
        match config.greedy_order {
            GreedyOrder::SmallestFirst => {
                let masks = Masks::new(a, spec, bound, Direction::Above);
                let mut cand = masks.unary(a);
                let mut from = 1;
                while let Some(c) = cand.next_one(from) {
                    b.push(c as u64);
                    masks.restrict_above(&mut cand, c, None);
                    from = c + 1;
                    steps += 1;
                }
            }
            GreedyOrder::LargestFirst => {
                let masks = Masks::new(a, spec, bound, Direction::Below);
                let mut cand = masks.unary(a);
                let mut end = bound as usize + 1;
                while let Some(c) = cand.prev_one(end) {
                    if c == 0 {
                        break;
                    }
                    b.push(c as u64);
                    masks.restrict_below(&mut cand, c);
                    end = c;
                    steps += 1;
                }
                b.reverse();
            }
        }
    }
    finish(a, spec, Strategy::Greedy, bound, b, false, steps)
}

struct Frame {
    /// Next candidate position this node will branch on.
    next: usize,
    /// Undo-log length before this node's own restriction.
    undo_mark: usize,
}

/// Depth-first branch and bound for a largest witness `B`.
///
/// Branches include candidates in increasing order and only strictly better
/// witnesses replace the incumbent, so the result is the lexicographically
/// smallest among maximum-size witnesses. A node is pruned once `|B|` plus
/// the remaining candidates cannot beat the incumbent.
pub fn max_b_search(a: &Truncation, spec: &PatternSpec, config: &SearchConfig) -> Result<SearchResult> {
    let bound = resolve_candidate_bound(a.n(), spec, config)?;
    if bound == 0 {
        return finish(a, spec, Strategy::BranchAndBound, 0, Vec::new(), true, 0);
    }
    let masks = Masks::new(a, spec, bound, Direction::Above);
    let mut cand = masks.unary(a);
    let ub = masks.bound();
    let started = Instant::now();

    let mut chosen: Vec<usize> = Vec::new();
    let mut best: Vec<usize> = Vec::new();
    let mut undo: Vec<u32> = Vec::new();
    let mut stack = vec![Frame { next: 1, undo_mark: 0 }];
    let mut nodes = 0u64;
    let mut exhausted = false;

    while let Some(top) = stack.last_mut() {
        let c = cand.next_one(top.next).filter(|&c| c <= ub);
        let viable = c.is_some_and(|c| chosen.len() as u64 + cand.count_range(c, ub + 1) > best.len() as u64);
        if !viable {
            let frame = stack.pop().expect("nonempty");
            if !stack.is_empty() {
                for &p in &undo[frame.undo_mark..] {
                    cand.set(p as usize);
                }
                undo.truncate(frame.undo_mark);
                chosen.pop();
            }
            continue;
        }
        let c = c.expect("viable implies a candidate");
        top.next = c + 1;

        if nodes >= config.node_budget {
            exhausted = true;
            break;
        }
        nodes += 1;
        if nodes % 4096 == 0 {
            if let Some(limit) = config.time_budget {
                if started.elapsed() >= limit {
                    exhausted = true;
                    break;
                }
            }
        }

        let mark = undo.len();
        masks.restrict_above(&mut cand, c, Some(&mut undo));
        chosen.push(c);
        if chosen.len() > best.len() {
            best = chosen.clone();
        }
        stack.push(Frame {
            next: c + 1,
            undo_mark: mark,
        });
    }

    let b = best.into_iter().map(|x| x as u64).collect();
    finish(a, spec, Strategy::BranchAndBound, bound, b, !exhausted, nodes)
}

/// Exhaustive search over all subsets of admissible candidates, for
/// `candidate_bound ≤ 22`. Pair and single-element admissibility are decided
/// by [`check_inclusion`] directly, independent of the bitset engine.
pub fn brute_force_max_b(a: &Truncation, spec: &PatternSpec, config: &SearchConfig) -> Result<SearchResult> {
    let bound = resolve_candidate_bound(a.n(), spec, config)?;
    if bound > BRUTE_FORCE_MAX_BOUND {
        return Err(Error::precondition(format!(
            "brute force refuses candidate bound {bound} > {BRUTE_FORCE_MAX_BOUND}"
        )));
    }
    let ok = |set: &[u64]| -> Result<bool> { Ok(check_inclusion(set, spec, a)?.holds) };
    let mut elems = Vec::new();
    for x in 1..=bound {
        if ok(&[x])? {
            elems.push(x);
        }
    }
    let k = elems.len();
    // adj[i]: bitmask of j compatible with i as a pair
    let mut adj = vec![0u32; k];
    for i in 0..k {
        for j in i + 1..k {
            if ok(&[elems[i], elems[j]])? {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    let total = 1usize << k;
    let mut valid = vec![false; total];
    valid[0] = true;
    let mut best_mask = 0usize;
    let mut best_set: Vec<u64> = Vec::new();
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        valid[mask] = valid[rest] && (adj[low] as usize & rest) == rest;
        if !valid[mask] {
            continue;
        }
        let size = mask.count_ones();
        let best_size = best_mask.count_ones();
        if size < best_size {
            continue;
        }
        let set: Vec<u64> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| elems[i]).collect();
        if size > best_size || set < best_set {
            best_mask = mask;
            best_set = set;
        }
    }
    if !ok(&best_set)? {
        return Err(Error::precondition("internal error: brute force witness fails"));
    }
    finish(a, spec, Strategy::BruteForce, bound, best_set, true, total as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftTable {
    /// `(t, result)` in the order of the requested shifts.
    pub rows: Vec<(u64, SearchResult)>,
    /// Shift with the largest witness, smallest `t` on ties.
    pub best_shift: Option<u64>,
}

impl ShiftTable {
    pub fn best(&self) -> Option<&SearchResult> {
        let t = self.best_shift?;
        self.rows.iter().find(|(s, _)| *s == t).map(|(_, r)| r)
    }
}

/// Runs the search once per shift in `shifts` (default `0..ℓ+m`), in parallel.
pub fn best_shift(
    a: &Truncation,
    spec: &PatternSpec,
    shifts: Option<&[u64]>,
    config: &SearchConfig,
    strategy: Strategy,
) -> Result<ShiftTable> {
    let default: Vec<u64> = (0..spec.l + spec.m).collect();
    let shifts = shifts.unwrap_or(&default);
    let rows: Vec<(u64, SearchResult)> = shifts
        .par_iter()
        .map(|&t| {
            let s = spec.with_shift(t);
            let r = match strategy {
                Strategy::Greedy => greedy_extend(a, &s, config),
                Strategy::BranchAndBound => max_b_search(a, &s, config),
                Strategy::BruteForce => brute_force_max_b(a, &s, config),
            }?;
            Ok((t, r))
        })
        .collect::<Result<_>>()?;
    let best_shift = rows
        .iter()
        .max_by(|x, y| x.1.size().cmp(&y.1.size()).then(y.0.cmp(&x.0)))
        .map(|(t, _)| *t);
    Ok(ShiftTable { rows, best_shift })
}

/// Searches for an unshifted witness inside `A ∩ (ℓ+m)ℕ`.
///
/// `spec.shift` must be 0.
pub fn unshifted_reduction(
    a: &SetSpec,
    spec: &PatternSpec,
    n: u64,
    config: &SearchConfig,
    budget: &MemoryBudget,
) -> Result<(SearchResult, Truncation)> {
    if spec.shift != 0 {
        return Err(Error::precondition("unshifted reduction searches at t = 0 only"));
    }
    let reduced = SetSpec::intersection(vec![a.clone(), SetSpec::residue(spec.l + spec.m, [0])?])?;
    let trunc = truncate_with_budget(&reduced, n, budget)?;
    let result = max_b_search(&trunc, spec, config)?;
    Ok((result, trunc))
}
