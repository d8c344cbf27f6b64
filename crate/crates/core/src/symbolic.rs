//! Finite pieces of points in `{0,1}^ℤ` built from a set `A`, cylinder
//! events, and exact visit frequencies under powers of the product shift.
//!
//! Only coordinates `0..=horizon` are stored; negative coordinates never
//! enter any computation here because orbits are taken with `n ≥ 1`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitBuf;
use crate::density::WindowSequence;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setkit::{truncate_with_budget, MemoryBudget, SetSpec, Truncation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// `word[n] = 1` iff `n ∈ A`; `word[0] = 0`.
    Indicator,
    /// `word[ℓ(q+1)i + j] = a[(ℓ+m)i + j]` for `i ≥ 1`, `j < ℓ+m`; 1 elsewhere.
    APrime { l: u64, m: u64 },
    /// `word[ℓi] = a[(ℓ+m)i]` for `i ≥ 1`; 1 elsewhere.
    ADoublePrime { l: u64, m: u64 },
}

#[derive(Clone, PartialEq, Eq)]
pub struct SymbolicPoint {
    word: BitBuf,
    rule: Rule,
}

impl fmt::Debug for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolicPoint({:?}, horizon={})", self.rule, self.horizon())
    }
}

impl SymbolicPoint {
    pub fn horizon(&self) -> u64 {
        self.word.len() as u64 - 1
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn word(&self) -> &BitBuf {
        &self.word
    }

    /// Coordinate `n`; panics past the horizon.
    pub fn get(&self, n: u64) -> bool {
        assert!(n <= self.horizon(), "coordinate {n} beyond horizon {}", self.horizon());
        self.word.get(n as usize)
    }

    /// The word as `0`/`1` characters, coordinates `0..=horizon`.
    pub fn to_bit_string(&self) -> String {
        (0..=self.horizon())
            .map(|n| if self.get(n) { '1' } else { '0' })
            .collect()
    }
}

fn check_lm(l: u64, m: u64) -> Result<()> {
    if l == 0 || m == 0 {
        return Err(Error::domain("l and m must be at least 1"));
    }
    Ok(())
}

/// `⌈m/ℓ⌉`.
pub fn ceil_k(l: u64, m: u64) -> u64 {
    m.div_ceil(l)
}

pub fn indicator_from_truncation(a: &Truncation) -> SymbolicPoint {
    SymbolicPoint {
        word: a.bits().slice_shifted(-1, a.n() as usize + 1),
        rule: Rule::Indicator,
    }
}

pub fn indicator_point(a: &SetSpec, n: u64) -> Result<SymbolicPoint> {
    indicator_point_with_budget(a, n, &MemoryBudget::default())
}

pub fn indicator_point_with_budget(a: &SetSpec, n: u64, budget: &MemoryBudget) -> Result<SymbolicPoint> {
    if n == 0 {
        return Err(Error::precondition("horizon must be at least 1"));
    }
    Ok(indicator_from_truncation(&truncate_with_budget(a, n, budget)?))
}

fn require_indicator(a: &SymbolicPoint) -> Result<()> {
    if a.rule != Rule::Indicator {
        return Err(Error::precondition(format!(
            "source point must be an indicator, got {:?}",
            a.rule
        )));
    }
    Ok(())
}

fn require_horizon(needed: u64, available: u64) -> Result<()> {
    if needed > available {
        return Err(Error::Horizon { needed, available });
    }
    Ok(())
}

/// Source horizon `build_a_doubleprime` needs for a target horizon.
pub fn a_doubleprime_source_need(l: u64, m: u64, horizon: u64) -> u64 {
    (l + m) * (horizon / l)
}

pub fn build_a_doubleprime(a: &SymbolicPoint, l: u64, m: u64, horizon: u64) -> Result<SymbolicPoint> {
    check_lm(l, m)?;
    require_indicator(a)?;
    require_horizon(a_doubleprime_source_need(l, m, horizon), a.horizon())?;
    let mut word = BitBuf::ones(horizon as usize + 1);
    for i in 1..=horizon / l {
        word.assign((l * i) as usize, a.get((l + m) * i));
    }
    Ok(SymbolicPoint {
        word,
        rule: Rule::ADoublePrime { l, m },
    })
}

/// Source horizon `build_a_prime` needs for a target horizon.
pub fn a_prime_source_need(l: u64, m: u64, horizon: u64) -> u64 {
    let block = l * (ceil_k(l, m) + 1);
    let width = l + m;
    let i = horizon / block;
    if i == 0 {
        0
    } else {
        width * i + (horizon % block).min(width - 1)
    }
}

pub fn build_a_prime(a: &SymbolicPoint, l: u64, m: u64, horizon: u64) -> Result<SymbolicPoint> {
    check_lm(l, m)?;
    require_indicator(a)?;
    require_horizon(a_prime_source_need(l, m, horizon), a.horizon())?;
    let block = l * (ceil_k(l, m) + 1);
    let width = l + m;
    let mut word = BitBuf::ones(horizon as usize + 1);
    for i in 1..=horizon / block {
        for j in 0..width {
            let n = block * i + j;
            if n > horizon {
                break;
            }
            word.assign(n as usize, a.get(width * i + j));
        }
    }
    Ok(SymbolicPoint {
        word,
        rule: Rule::APrime { l, m },
    })
}

/// Coordinates in `[1, horizon]` that the a′ rule fills with 1 regardless of
/// `A`: the first block and the tail `j ≥ ℓ+m` of every later block.
pub fn a_prime_padding_count(l: u64, m: u64, horizon: u64) -> u64 {
    let block = l * (ceil_k(l, m) + 1);
    let width = l + m;
    let first = (block - 1).min(horizon);
    let full = horizon / block;
    let mut count = first + full.saturating_sub(1) * (block - width);
    if full >= 1 {
        let r = horizon % block;
        count += (r + 1).saturating_sub(width);
    }
    count
}

/// Product cylinder: constraints on the first and second coordinates of a pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderEvent {
    pub first: Vec<(u64, bool)>,
    pub second: Vec<(u64, bool)>,
}

impl CylinderEvent {
    pub fn new(first: Vec<(u64, bool)>, second: Vec<(u64, bool)>) -> Self {
        CylinderEvent { first, second }
    }

    /// `Σ × E`
    pub fn sigma_e() -> Self {
        Self::new(Vec::new(), vec![(0, true)])
    }

    /// `E × Σ`
    pub fn e_sigma() -> Self {
        Self::new(vec![(0, true)], Vec::new())
    }

    /// `S^{−j}E × Σ`
    pub fn shifted_e_sigma(j: u64) -> Self {
        Self::new(vec![(j, true)], Vec::new())
    }

    pub fn label(&self) -> String {
        let side = |c: &[(u64, bool)]| {
            if c.is_empty() {
                return "S".to_string();
            }
            c.iter()
                .map(|(o, b)| format!("x{o}={}", *b as u8))
                .collect::<Vec<_>>()
                .join("&")
        };
        format!("{}|{}", side(&self.first), side(&self.second))
    }

    fn reach(c: &[(u64, bool)]) -> Option<u64> {
        c.iter().map(|&(o, _)| o).max()
    }

    fn holds(&self, x: &SymbolicPoint, y: &SymbolicPoint, nx: u64, ny: u64) -> bool {
        self.first.iter().all(|&(o, b)| x.get(nx + o) == b) && self.second.iter().all(|&(o, b)| y.get(ny + o) == b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    pub powers: (u64, u64),
    pub samples: u64,
    pub hits: u64,
    pub frequency: Rational,
}

fn check_orbit_horizon(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    (p, q): (u64, u64),
    event: &CylinderEvent,
    n: u64,
) -> Result<()> {
    if let Some(r) = CylinderEvent::reach(&event.first) {
        require_horizon(p * n + r, x.horizon())?;
    }
    if let Some(r) = CylinderEvent::reach(&event.second) {
        require_horizon(q * n + r, y.horizon())?;
    }
    Ok(())
}

/// Hit counts of `(S^p × S^q)^n (x, y) ∈ event` for `n = 1..=c`, read off at
/// each checkpoint `c` (ascending).
fn cumulative_hits(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    powers: (u64, u64),
    event: &CylinderEvent,
    checkpoints: &[u64],
) -> Result<Vec<u64>> {
    let Some(&last) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    check_orbit_horizon(x, y, powers, event, last)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut hits = 0;
    let mut next = checkpoints.iter().peekable();
    while next.peek() == Some(&&0) {
        out.push(0);
        next.next();
    }
    for n in 1..=last {
        if event.holds(x, y, powers.0 * n, powers.1 * n) {
            hits += 1;
        }
        while next.peek() == Some(&&n) {
            out.push(hits);
            next.next();
        }
    }
    Ok(out)
}

/// `(1/N)·#{1 ≤ n ≤ N : (S^p × S^q)^n (x, y) ∈ event}`, exactly.
pub fn orbit_frequency(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    powers: (u64, u64),
    event: &CylinderEvent,
    n: u64,
) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::precondition("sample count must be at least 1"));
    }
    let hits = cumulative_hits(x, y, powers, event, &[n])?[0];
    Ok(EmpiricalMeasure {
        powers,
        samples: n,
        hits,
        frequency: rational::ratio(hits, n),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub l: u64,
    pub m: u64,
    pub horizon: u64,
    /// Number of `n` compared for `{n : a″(ℓn) = 1} = A/(ℓ+m)`.
    pub doubleprime_checked: u64,
    pub doubleprime_mismatches: Vec<u64>,
    /// Number of `(j, n)` compared for `{n : a′(ℓ(q+1)n + j) = 1} = (A−j)/(ℓ+m)`.
    pub prime_checked: u64,
    pub prime_mismatches: Vec<(u64, u64)>,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.doubleprime_mismatches.is_empty() && self.prime_mismatches.is_empty()
    }
}

/// Builds a″ and a′ from the truncation of `A` and compares their hitting
/// sets with membership evaluated directly on the set description.
pub fn verify_identity_sets(a: &SetSpec, l: u64, m: u64, horizon: u64) -> Result<IdentityReport> {
    check_lm(l, m)?;
    let width = l + m;
    let mut report = IdentityReport {
        l,
        m,
        horizon,
        doubleprime_checked: 0,
        doubleprime_mismatches: Vec::new(),
        prime_checked: 0,
        prime_mismatches: Vec::new(),
    };
    if horizon < width {
        return Ok(report);
    }
    let ind = indicator_point(a, horizon)?;

    let top = horizon / width;
    let dp = build_a_doubleprime(&ind, l, m, l * top)?;
    for n in 1..=top {
        report.doubleprime_checked += 1;
        if dp.get(l * n) != a.contains(width * n) {
            report.doubleprime_mismatches.push(n);
        }
    }

    // keep (ℓ+m)n + j ≤ horizon for every j < ℓ+m
    let top = (horizon + 1) / width - 1;
    if top >= 1 {
        let block = l * (ceil_k(l, m) + 1);
        let ap = build_a_prime(&ind, l, m, block * top + width - 1)?;
        for j in 0..width {
            for n in 1..=top {
                report.prime_checked += 1;
                if ap.get(block * n + j) != a.contains(width * n + j) {
                    report.prime_mismatches.push((j, n));
                }
            }
        }
    }
    Ok(report)
}

/// The four measure inequalities checked at finite scale. "Shifted" forms
/// use the a′ point under `S^{q+1} × S`, "unshifted" ones a″ under `S × S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `(ℓ+m)μ(Σ×E) + ℓμ(E×Σ) ≥ (2ℓ+m)((k+1)d̄ − k)`
    UpperUnshifted,
    /// `(ℓ+m)μ(Σ×E) + ℓΣ_{j≤q} μ(S^{−j}E×Σ) ≥ (ℓ+m)((k+1)d̄ − k) + ℓ(k+1)d̄ + ℓ(q−k)`
    UpperShifted,
    /// `(ℓ+m)μ(Σ×E) + ℓΣ_{j≤q} μ(S^{−j}E×Σ) ≥ (ℓ+m)d̲ + ℓ(k+1)d̄ + ℓ(q−k)`
    LowerShifted,
    /// `(ℓ+m)μ(Σ×E) + ℓμ(E×Σ) ≥ (ℓ+m)d̲ + ℓ((k+1)d̄ − k)`
    LowerUnshifted,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [
        Inequality::UpperUnshifted,
        Inequality::UpperShifted,
        Inequality::LowerShifted,
        Inequality::LowerUnshifted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::UpperUnshifted => "upper_unshifted",
            Inequality::UpperShifted => "upper_shifted",
            Inequality::LowerShifted => "lower_shifted",
            Inequality::LowerUnshifted => "lower_unshifted",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Density values plugged into the right-hand sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensitySurrogate {
    /// `d̄` is the ratio at `N_i`; `d̲` the smallest prefix ratio over
    /// `[N′_i, N_i]`.
    Empirical,
    /// Fixed values, e.g. known closed forms.
    Exact { upper: Rational, lower: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityRow {
    pub inequality: Inequality,
    pub lhs: Rational,
    pub rhs: Rational,
    pub margin: Rational,
    /// `lhs ≥ rhs − ε`
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowResult {
    /// 1-based position in the window sequence.
    pub index: usize,
    pub endpoint: u64,
    /// `⌊N_i/(k+1)⌋`, the number of orbit samples.
    pub n_prime: u64,
    pub upper_density: Rational,
    pub lower_density: Rational,
    /// `μ_i(Σ×E)`
    pub sigma_e: Rational,
    /// `μ_i(E×Σ)` for `(a″, a)`
    pub e_sigma: Rational,
    /// `μ_i(S^{−j}E×Σ)` for `(a′, a)`, `j = 0..=q`
    pub shifted: Vec<Rational>,
    pub rows: Vec<InequalityRow>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityReport {
    pub l: u64,
    pub m: u64,
    pub epsilon: Rational,
    pub windows: Vec<WindowResult>,
}

impl InequalityReport {
    pub fn row(&self, window: usize, which: Inequality) -> &InequalityRow {
        self.windows[window]
            .rows
            .iter()
            .find(|r| r.inequality == which)
            .expect("every window carries every inequality")
    }

    /// Result at the last window.
    pub fn verdict(&self, which: Inequality) -> &InequalityRow {
        self.row(self.windows.len() - 1, which)
    }

    /// Window (0-based position in `windows`) with the largest margin.
    pub fn best_margin(&self, which: Inequality) -> (usize, &InequalityRow) {
        (0..self.windows.len())
            .map(|w| (w, self.row(w, which)))
            .max_by(|a, b| a.1.margin.cmp(&b.1.margin).then(b.0.cmp(&a.0)))
            .expect("reports are never empty")
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("window\tendpoint\tn_prime\tinequality\tlhs\trhs\tmargin\tholds\n");
        for w in &self.windows {
            for r in &w.rows {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    w.index,
                    w.endpoint,
                    w.n_prime,
                    r.inequality,
                    rational::format_decimal(&r.lhs, 9),
                    rational::format_decimal(&r.rhs, 9),
                    rational::format_decimal(&r.margin, 9),
                    r.holds
                ));
            }
        }
        s
    }

    /// One row per window and event: exact frequency as numerator/denominator.
    pub fn frequencies_tsv(&self) -> String {
        let mut s = String::from("window\tevent\tnumerator\tdenominator\n");
        for w in &self.windows {
            let mut put = |event: String, f: &Rational| {
                s.push_str(&format!("{}\t{}\t{}\t{}\n", w.index, event, f.numer(), f.denom()));
            };
            put("sigma_x_E".into(), &w.sigma_e);
            put("E_x_sigma".into(), &w.e_sigma);
            for (j, f) in w.shifted.iter().enumerate() {
                put(format!("S^-{j}E_x_sigma"), f);
            }
        }
        s
    }
}

/// Smallest `|A ∩ [1, N]| / N` over `N ∈ [lo, hi]`.
fn min_prefix_ratio(a: &Truncation, lo: u64, hi: u64) -> Rational {
    let lo = lo.max(1);
    let mut count = a.count_upto(lo);
    let mut best = (count, lo);
    for n in lo + 1..=hi {
        count += a.contains(n) as u64;
        if (count as u128) * (best.1 as u128) < (best.0 as u128) * (n as u128) {
            best = (count, n);
        }
    }
    rational::ratio(best.0, best.1)
}

/// Finite-scale check of the four measure inequalities along `windows`.
///
/// For each window endpoint `N_i` the orbit measures are averaged over
/// `n = 1..=N′_i` with `N′_i = ⌊N_i/(k+1)⌋`; windows with `N′_i = 0` are
/// skipped. An inequality holds at a window when `lhs ≥ rhs − ε`.
pub fn inequality_report(
    a: &SetSpec,
    l: u64,
    m: u64,
    windows: &WindowSequence,
    epsilon: &Rational,
    surrogate: &DensitySurrogate,
    budget: &MemoryBudget,
) -> Result<InequalityReport> {
    check_lm(l, m)?;
    if *epsilon <= Rational::zero() {
        return Err(Error::domain("tolerance must be positive"));
    }
    let width = l + m;
    let q = ceil_k(l, m);
    let endpoints: Vec<(usize, u64, u64)> = windows
        .endpoints()?
        .into_iter()
        .enumerate()
        .map(|(i, e)| (i + 1, e, ((e as u128 * l as u128) / width as u128) as u64))
        .filter(|&(_, _, np)| np >= 1)
        .collect();
    let Some(&(_, n_last, np_last)) = endpoints.last() else {
        return Err(Error::precondition("no window is long enough to sample an orbit"));
    };
    let ap_horizon = (q + 1) * np_last + q;
    let horizon = n_last
        .max(a_doubleprime_source_need(l, m, np_last))
        .max(a_prime_source_need(l, m, ap_horizon));
    let trunc = truncate_with_budget(a, horizon, budget)?;
    let ind = indicator_from_truncation(&trunc);
    let dp = build_a_doubleprime(&ind, l, m, np_last)?;
    let ap = build_a_prime(&ind, l, m, ap_horizon)?;

    let checkpoints: Vec<u64> = endpoints.iter().map(|e| e.2).collect();
    let sigma_e = cumulative_hits(&dp, &ind, (1, 1), &CylinderEvent::sigma_e(), &checkpoints)?;
    let e_sigma = cumulative_hits(&dp, &ind, (1, 1), &CylinderEvent::e_sigma(), &checkpoints)?;
    let shifted = (0..=q)
        .map(|j| cumulative_hits(&ap, &ind, (q + 1, 1), &CylinderEvent::shifted_e_sigma(j), &checkpoints))
        .collect::<Result<Vec<_>>>()?;

    let lr = rational::from_u64(l);
    let sr = rational::from_u64(width);
    let k = rational::rat(m as i64, l as i64);
    let k1 = &k + Rational::one();
    let qk = rational::from_u64(q) - &k;

    let mut out = Vec::with_capacity(endpoints.len());
    for (w, &(index, endpoint, np)) in endpoints.iter().enumerate() {
        let (upper, lower) = match surrogate {
            DensitySurrogate::Exact { upper, lower } => (upper.clone(), lower.clone()),
            DensitySurrogate::Empirical => (
                rational::ratio(trunc.count_upto(endpoint), endpoint),
                min_prefix_ratio(&trunc, np, endpoint),
            ),
        };
        let se = rational::ratio(sigma_e[w], np);
        let es = rational::ratio(e_sigma[w], np);
        let sh: Vec<Rational> = shifted.iter().map(|h| rational::ratio(h[w], np)).collect();
        let sh_sum: Rational = sh.iter().sum();

        let lhs_unshifted = &sr * &se + &lr * &es;
        let lhs_shifted = &sr * &se + &lr * &sh_sum;
        let up = &k1 * &upper - &k;
        let rows = Inequality::ALL
            .iter()
            .map(|&which| {
                let (lhs, rhs) = match which {
                    Inequality::UpperUnshifted => (&lhs_unshifted, (&sr + &lr) * &up),
                    Inequality::UpperShifted => (&lhs_shifted, &sr * &up + &lr * &k1 * &upper + &lr * &qk),
                    Inequality::LowerShifted => (&lhs_shifted, &sr * &lower + &lr * &k1 * &upper + &lr * &qk),
                    Inequality::LowerUnshifted => (&lhs_unshifted, &sr * &lower + &lr * &up),
                };
                let margin = lhs - &rhs;
                InequalityRow {
                    inequality: which,
                    lhs: lhs.clone(),
                    holds: margin >= -epsilon.clone(),
                    rhs,
                    margin,
                }
            })
            .collect();
        out.push(WindowResult {
            index,
            endpoint,
            n_prime: np,
            upper_density: upper,
            lower_density: lower,
            sigma_e: se,
            e_sigma: es,
            shifted: sh,
            rows,
        });
    }
    Ok(InequalityReport {
        l,
        m,
        epsilon: epsilon.clone(),
        windows: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_counterexample, Construction, FamilyId};
    use crate::setkit::truncate;

    fn res(modulus: u64, r: u64) -> SetSpec {
        SetSpec::residue(modulus, [r]).unwrap()
    }

    #[test]
    fn indicator_words() {
        assert_eq!(indicator_point(&res(2, 0), 6).unwrap().to_bit_string(), "0010101");
        assert_eq!(
            indicator_point(&SetSpec::explicit([1]).unwrap(), 3)
                .unwrap()
                .to_bit_string(),
            "0100"
        );
        assert!(indicator_point(&res(2, 0), 0).is_err());
    }

    #[test]
    fn doubleprime_examples() {
        let a = indicator_point(&res(2, 0), 200).unwrap();
        let dp = build_a_doubleprime(&a, 1, 1, 100).unwrap();
        assert!((1..=100).all(|n| dp.get(n)));

        let a = indicator_point(&SetSpec::explicit([3, 6, 7]).unwrap(), 9).unwrap();
        let dp = build_a_doubleprime(&a, 1, 2, 3).unwrap();
        let hits: Vec<u64> = (1..=3).filter(|&n| dp.get(n)).collect();
        assert_eq!(hits, vec![1, 2]);

        let a = indicator_point(&res(4, 0), 400).unwrap();
        let dp = build_a_doubleprime(&a, 2, 2, 200).unwrap();
        assert!((0..=200).all(|n| dp.get(n)));
    }

    #[test]
    fn doubleprime_needs_horizon() {
        let a = indicator_point(&res(2, 0), 50).unwrap();
        let e = build_a_doubleprime(&a, 1, 1, 30).unwrap_err();
        assert!(matches!(
            e,
            Error::Horizon {
                needed: 60,
                available: 50
            }
        ));
        let dp = build_a_doubleprime(&a, 1, 1, 25).unwrap();
        assert!(build_a_prime(&dp, 1, 1, 10).is_err());
    }

    #[test]
    fn aprime_examples() {
        // ℓ=2, m=3: q=2, blocks of 6 read 5 source coordinates
        let a = indicator_point(&res(5, 0), 1000).unwrap();
        let ap = build_a_prime(&a, 2, 3, 1000).unwrap();
        for i in 1..150u64 {
            assert!(ap.get(6 * i));
            for j in 0..5 {
                assert_eq!(ap.get(6 * i + j), (5 * i + j) % 5 == 0);
            }
            assert!(ap.get(6 * i + 5));
        }

        let a = indicator_from_truncation(&truncate(&res(3, 1), 500).unwrap());
        let ap = build_a_prime(&a, 1, 1, 500).unwrap();
        assert!((2..=500).all(|n| ap.get(n) == a.get(n)));
    }

    #[test]
    fn aprime_on_empty_set_is_padding() {
        for (l, m) in [(1, 2), (2, 3), (3, 1), (2, 5)] {
            let a = indicator_point(&SetSpec::empty(), 5000).unwrap();
            let h = 3000;
            let ap = build_a_prime(&a, l, m, h).unwrap();
            let block = l * (ceil_k(l, m) + 1);
            for n in 1..=h {
                let pad = n < block || n % block >= l + m;
                assert_eq!(ap.get(n), pad, "l={l} m={m} n={n}");
            }
            assert_eq!(ap.word().count_range(1, h as usize + 1), a_prime_padding_count(l, m, h));
        }
    }

    #[test]
    fn divisible_case_has_no_padding() {
        for (l, m) in [(1, 1), (1, 3), (2, 4)] {
            let q = ceil_k(l, m);
            assert_eq!(l * q, m);
            let a = indicator_from_truncation(&truncate(&res(7, 2), 4000).unwrap());
            let ap = build_a_prime(&a, l, m, 3000).unwrap();
            let block = l * (q + 1);
            assert!((block..=3000).all(|n| ap.get(n) == a.get(n)));
        }
    }

    #[test]
    fn padding_density() {
        for (l, m) in [(2, 3), (3, 1), (3, 5), (1, 1)] {
            let big = 1_000_000;
            let f = rational::ratio(a_prime_padding_count(l, m, big), big);
            let q = ceil_k(l, m);
            let k = rational::rat(m as i64, l as i64);
            let want = (rational::from_u64(q) - k) / rational::from_u64(q + 1);
            assert!(rational::to_f64(&(f - want)).abs() < 0.01);
        }
    }

    #[test]
    fn frequency_examples() {
        let ev = indicator_point(&res(2, 0), 2000).unwrap();
        let f = orbit_frequency(&ev, &ev, (1, 1), &CylinderEvent::sigma_e(), 1000).unwrap();
        assert_eq!(f.frequency, rational::rat(1, 2));

        let a = indicator_point(&res(2, 0), 1000).unwrap();
        let dp = build_a_doubleprime(&a, 1, 1, 500).unwrap();
        let f = orbit_frequency(&dp, &a, (1, 1), &CylinderEvent::e_sigma(), 500).unwrap();
        assert_eq!(f.frequency, Rational::one());

        let e = orbit_frequency(&dp, &a, (1, 1), &CylinderEvent::e_sigma(), 501).unwrap_err();
        assert!(matches!(e, Error::Horizon { .. }));
    }

    #[test]
    fn sigma_e_counts_the_set() {
        let spec = build_counterexample(&FamilyId::new(Construction::P51_A, 1, 1).unwrap());
        let t = truncate(&spec, 3000).unwrap();
        let a = indicator_from_truncation(&t);
        let x = indicator_point(&res(3, 0), 9000).unwrap();
        for n in [1, 17, 100, 999, 1000] {
            for p in [1, 2, 3] {
                let f = orbit_frequency(&x, &a, (p, 1), &CylinderEvent::sigma_e(), n).unwrap();
                assert_eq!(f.frequency, rational::ratio(t.count_upto(n), n));
            }
        }
    }

    #[test]
    fn identities_hold() {
        for (a, l, m) in [
            (res(3, 0), 2, 3),
            (res(2, 1), 1, 2),
            (SetSpec::empty(), 3, 2),
            (
                build_counterexample(&FamilyId::new(Construction::P51_A, 1, 1).unwrap()),
                1,
                1,
            ),
        ] {
            let r = verify_identity_sets(&a, l, m, 5000).unwrap();
            assert!(r.pass());
            assert!(r.prime_checked > 0 && r.doubleprime_checked > 0);
        }
    }

    #[test]
    fn unreachable_windows_are_rejected() {
        let w = WindowSequence::Explicit { endpoints: vec![1] };
        let e = inequality_report(
            &res(2, 0),
            1,
            1,
            &w,
            &rational::rat(1, 20),
            &DensitySurrogate::Empirical,
            &MemoryBudget::default(),
        );
        assert!(e.is_err());
        let w = WindowSequence::Prefixes { n: 100 };
        let e = inequality_report(
            &res(2, 0),
            1,
            1,
            &w,
            &Rational::zero(),
            &DensitySurrogate::Empirical,
            &MemoryBudget::default(),
        );
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn naturals_saturate() {
        let w = WindowSequence::Prefixes { n: 300 };
        for (l, m) in [(1, 1), (2, 3), (3, 1)] {
            let r = inequality_report(
                &SetSpec::naturals(),
                l,
                m,
                &w,
                &rational::rat(1, 20),
                &DensitySurrogate::Empirical,
                &MemoryBudget::default(),
            )
            .unwrap();
            let last = r.windows.last().unwrap();
            assert_eq!(last.sigma_e, Rational::one());
            assert_eq!(last.e_sigma, Rational::one());
            assert!(last.shifted.iter().all(|f| f.is_one()));
            for which in Inequality::ALL {
                assert!(r.verdict(which).holds);
                assert!(r.verdict(which).margin >= Rational::zero());
            }
        }
    }

    #[test]
    fn evens_lower_unshifted() {
        let exact = DensitySurrogate::Exact {
            upper: rational::rat(1, 2),
            lower: rational::rat(1, 2),
        };
        let w = WindowSequence::Prefixes { n: 2000 };
        let r = inequality_report(
            &res(2, 0),
            1,
            1,
            &w,
            &rational::rat(1, 20),
            &exact,
            &MemoryBudget::default(),
        )
        .unwrap();
        let v = r.verdict(Inequality::LowerUnshifted);
        assert_eq!(v.rhs, Rational::one());
        assert_eq!(v.lhs, rational::int(2));
        assert!(r.to_tsv().lines().count() == 1 + 4 * r.windows.len());
        assert!(r.frequencies_tsv().contains("S^-1E_x_sigma"));
    }
}
