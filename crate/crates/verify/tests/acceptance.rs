//! One PASS/FAIL line per acceptance criterion. Tolerances and budgets are
//! pinned below; the process exits nonzero if any criterion fails.

use std::cmp::Ordering;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sumsetlab::density::{density_curve, golden_ratio_comparison, threshold, ThresholdId, WindowSequence};
use sumsetlab::families::{
    blocking_safe_start, blocking_scan, build_counterexample, gap_density_check, growth_curve, optimality_report,
    Construction, FamilyId,
};
use sumsetlab::patterns::{
    brute_force_max_b, check_inclusion, greedy_extend, max_b_search, shift_equivalence_check, verify_certificate,
    Certificate, PatternSpec, Relation, SearchConfig,
};
use sumsetlab::rational;
use sumsetlab::setkit::{truncate, MemoryBudget, SetSpec, Truncation};
use sumsetlab::symbolic::{inequality_report, verify_identity_sets, DensitySurrogate, Inequality};

const SEED: u64 = 0x5eed_2024;
const DENSITY_TOL_I8: f64 = 0.05;
const DENSITY_TOL_I12: f64 = 0.02;
const ORACLE_INSTANCES: usize = 200;
const SHIFT_INSTANCES: usize = 1000;
const OPTIMALITY_NODE_BUDGET: u64 = 200_000;
const INEQUALITY_SLACK: (i64, i64) = (1, 20);
const GAP_TOL: f64 = 0.02;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (
        elapsed < limit,
        format!("{:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn fid(c: Construction, l: u64, m: u64) -> FamilyId {
    FamilyId::new(c, l, m).expect("valid family parameters")
}

fn budget() -> MemoryBudget {
    MemoryBudget::default()
}

fn thresholds() -> Outcome {
    let started = Instant::now();
    let expected = [
        (ThresholdId::T1_7, rational::rat(2, 3)),
        (ThresholdId::T1_8, rational::rat(5, 6)),
        (ThresholdId::C6_5_1, rational::rat(1, 2)),
        (ThresholdId::C6_5_2, rational::rat(3, 4)),
    ];
    let mut bad = Vec::new();
    for (id, want) in &expected {
        match threshold(*id, 1, 1) {
            Ok(got) if got == *want => {}
            Ok(got) => bad.push(format!("{} = {}", id.name(), rational::format_fraction(&got))),
            Err(e) => bad.push(format!("{}: {e}", id.name())),
        }
    }
    let (fast, time) = within(started.elapsed(), Duration::from_secs(1));
    outcome(bad.is_empty() && fast, format!("mismatches {bad:?}; {time}"))
}

fn family_density_at(id: &FamilyId, windows: u64) -> Result<(u64, f64), String> {
    let w = WindowSequence::family_windows(id.base(), windows);
    let n = w.horizon().map_err(|e| e.to_string())?;
    let a = truncate(&build_counterexample(id), n).map_err(|e| e.to_string())?;
    let r = density_curve(&a, &w).map_err(|e| e.to_string())?;
    Ok((n, rational::to_f64(&r.last().ratio)))
}

fn family_density() -> Outcome {
    let started = Instant::now();
    let target = 2.0 / 3.0;
    let p51 = fid(Construction::P51_A, 1, 1);
    let p71 = fid(Construction::P71_A, 2, 1);
    let checks = [
        (&p51, 8, DENSITY_TOL_I8),
        (&p51, 12, DENSITY_TOL_I12),
        (&p71, 8, DENSITY_TOL_I8),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (id, i, tol) in checks {
        match family_density_at(id, i) {
            Ok((n, d)) => {
                let ok = (d - target).abs() <= tol;
                pass &= ok;
                parts.push(format!(
                    "{id} I={i} N={n} density={d:.4} |err|={:.4} tol={tol} {}",
                    (d - target).abs(),
                    if ok { "ok" } else { "over" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{id} I={i}: {e}"));
            }
        }
    }
    let (fast, time) = within(started.elapsed(), Duration::from_secs(10));
    outcome(pass && fast, format!("{}; {time}", parts.join("; ")))
}

fn random_truncation(rng: &mut ChaCha8Rng, n: u64) -> Truncation {
    let keep: f64 = rng.gen_range(0.3..0.95);
    let members: Vec<u64> = (1..=n).filter(|_| rng.gen_bool(keep)).collect();
    Truncation::from_members(n, members).expect("members lie in [1, N]")
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let relations = [Relation::Strict, Relation::Weak, Relation::Distinct, Relation::All];
    let mut mismatches = Vec::new();
    let mut checked = 0;
    while checked < ORACLE_INSTANCES {
        let n = rng.gen_range(12..=60);
        let m = rng.gen_range(1..=2);
        let l = rng.gen_range(1..=2);
        let t = rng.gen_range(0..=2);
        let rel = relations[checked % relations.len()];
        let spec = PatternSpec::new(m, l, rel).expect("m, l >= 1").with_shift(t);
        let cap = ((n - t) / (m + l)).min(18);
        if cap == 0 {
            continue;
        }
        let a = random_truncation(&mut rng, n);
        let cfg = SearchConfig::default().with_bound(rng.gen_range(1..=cap));
        checked += 1;
        match (max_b_search(&a, &spec, &cfg), brute_force_max_b(&a, &spec, &cfg)) {
            (Ok(x), Ok(y)) if x.optimal && x.size() == y.size() => {}
            (Ok(x), Ok(y)) => mismatches.push(format!("#{checked}: b&b {} vs brute {}", x.size(), y.size())),
            (x, y) => mismatches.push(format!("#{checked}: {:?} / {:?}", x.err(), y.err())),
        }
    }
    let (fast, time) = within(started.elapsed(), Duration::from_secs(120));
    outcome(
        mismatches.is_empty() && fast,
        format!(
            "{checked} instances, {} mismatches {:?}; {time}",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn blocking() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let p51 = fid(Construction::P51_A, 1, 1);
    let p71 = fid(Construction::P71_A, 2, 1);
    let p71_start = blocking_safe_start(&p71, 2, 8).map(|(_, s)| s);
    let runs = [(p51, 1, 16, Ok(128), 65_536), (p71, 2, 8, p71_start, 100_000)];
    for (id, t, b1, start, end) in runs {
        let started = Instant::now();
        let report = start.and_then(|s| blocking_scan(&id, t, b1, s, end, &budget()));
        let (fast, time) = within(started.elapsed(), Duration::from_secs(60));
        match report {
            Ok(r) => {
                let ok = r.pass() && fast;
                pass &= ok;
                parts.push(format!(
                    "{id} t<={t} b1<={b1} [{}, {}] anchors={} violations={} {time}",
                    r.start,
                    r.end,
                    r.anchors_checked,
                    r.violations.len()
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{id}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

/// Certified interval for the optimum at one `N`: a found witness is a lower
/// bound; the upper bound is the witness size when the search closed and the
/// candidate count otherwise.
fn certified_range(report: &sumsetlab::families::OptimalityReport, n: u64) -> (usize, u64) {
    let rows: Vec<_> = report.rows.iter().filter(|r| r.n == n).collect();
    let lo = rows.iter().map(|r| r.size).max().unwrap_or(0);
    let hi = rows
        .iter()
        .map(|r| if r.optimal { r.size as u64 } else { r.candidate_bound })
        .max()
        .unwrap_or(0);
    (lo, hi)
}

fn optimality_signature() -> Outcome {
    let started = Instant::now();
    let schedule = [1u64 << 10, 1 << 14, 1 << 18];
    let cfg = SearchConfig::default().with_node_budget(OPTIMALITY_NODE_BUDGET);
    let id = fid(Construction::P51_A, 1, 1);
    let report = match optimality_report(&id, Relation::Weak, &schedule, &[0, 1], &cfg, &budget()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("optimality_report: {e}")),
    };
    let ranges: Vec<(usize, u64)> = schedule.iter().map(|&n| certified_range(&report, n)).collect();
    let bounded = ranges[2].1 <= ranges[1].0 as u64 + 1;

    // An explicit witness inside [1, 2^18]: every pairwise sum of
    // [2^15, 57343] lands in A's interval [4^8, 1.875·4^8).
    let a = truncate(&build_counterexample(&id), schedule[2]).expect("truncation fits");
    let witness: Vec<u64> = (32_768..=57_343).collect();
    let spec = PatternSpec::new(1, 1, Relation::Weak).expect("valid pattern");
    let witness_ok = check_inclusion(&witness, &spec, &a).map(|c| c.holds).unwrap_or(false);

    let control = SetSpec::residue(2, [0]).expect("valid residue");
    let control_spec = PatternSpec::new(1, 1, Relation::Weak).expect("valid pattern");
    let ctrl = growth_curve(
        "Residue(2,{0})",
        &control,
        &control_spec,
        &schedule,
        &[0],
        &cfg,
        &budget(),
    );
    let (ctrl_ok, ctrl_sizes) = match &ctrl {
        Ok(r) => {
            let sizes: Vec<usize> = schedule.iter().map(|&n| r.max_size_at(n).unwrap_or(0)).collect();
            let grows = sizes.windows(2).all(|w| w[1] >= 2 * w[0] && w[0] > 0);
            (grows, format!("{sizes:?}"))
        }
        Err(e) => (false, e.to_string()),
    };
    let (fast, time) = within(started.elapsed(), Duration::from_secs(600));
    outcome(
        bounded && ctrl_ok && fast,
        format!(
            "P51_A(1,1) certified ranges [lo, hi] at N=2^10,2^14,2^18: {ranges:?}; bounded growth (hi(2^18) <= lo(2^14)+1): {bounded}; \
             explicit witness [32768, 57343] of size {} valid at 2^18: {witness_ok}; control sizes {ctrl_sizes} doubling: {ctrl_ok}; {time}",
            witness.len()
        ),
    )
}

fn shift_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let relations = [Relation::Strict, Relation::Weak, Relation::Distinct, Relation::All];
    let mut failures = 0;
    for case in 0..SHIFT_INSTANCES {
        let len = rng.gen_range(0..10);
        let mut b: Vec<u64> = (0..len).map(|_| rng.gen_range(1..60)).collect();
        b.sort_unstable();
        b.dedup();
        let (m, l) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let t = rng.gen_range(0..40);
        let spec = PatternSpec::new(m, l, relations[case % 4])
            .expect("valid")
            .with_shift(t);
        let a = random_truncation(&mut rng, 600);
        if !matches!(shift_equivalence_check(&b, &spec, &a), Ok(true)) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{SHIFT_INSTANCES} instances, {failures} failures"),
    )
}

fn identity_grid() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let random = SetSpec::explicit((1..=100_000u64).filter(|_| rng.gen_bool(0.5))).expect("positive members");
    let sets = [
        ("random(1/2)", random),
        ("Residue(3,{0})", SetSpec::residue(3, [0]).expect("valid")),
        ("P51_A(1,1)", build_counterexample(&fid(Construction::P51_A, 1, 1))),
        ("P66_A(1,1)", build_counterexample(&fid(Construction::P66_A, 1, 1))),
        ("empty", SetSpec::empty()),
    ];
    let params = [(1, 1), (1, 2), (2, 3), (3, 1)];
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, a) in &sets {
        for &(l, m) in &params {
            checked += 1;
            match verify_identity_sets(a, l, m, 100_000) {
                Ok(r) if r.pass() => {}
                Ok(r) => failures.push(format!(
                    "{name} l={l} m={m}: {} + {} mismatches",
                    r.doubleprime_mismatches.len(),
                    r.prime_mismatches.len()
                )),
                Err(e) => failures.push(format!("{name} l={l} m={m}: {e}")),
            }
        }
    }
    let (fast, time) = within(started.elapsed(), Duration::from_secs(30));
    outcome(
        failures.is_empty() && fast,
        format!("{checked} combinations, failures {failures:?}; {time}"),
    )
}

fn measure_inequalities() -> Outcome {
    let started = Instant::now();
    let eps = rational::rat(INEQUALITY_SLACK.0, INEQUALITY_SLACK.1);
    let a = build_counterexample(&fid(Construction::P51_A, 1, 1));
    let p51 = inequality_report(
        &a,
        1,
        1,
        &WindowSequence::family_windows(rational::int(2), 8),
        &eps,
        &DensitySurrogate::Exact {
            upper: rational::rat(2, 3),
            lower: rational::rat(1, 2),
        },
        &budget(),
    );
    let evens = SetSpec::residue(2, [0]).expect("valid");
    let half = rational::rat(1, 2);
    let control = inequality_report(
        &evens,
        1,
        1,
        &WindowSequence::Prefixes { n: 4000 },
        &eps,
        &DensitySurrogate::Exact {
            upper: half.clone(),
            lower: half,
        },
        &budget(),
    );
    let describe = |r: &sumsetlab::symbolic::InequalityRow| {
        format!(
            "lhs={} rhs={} holds={}",
            rational::format_decimal(&r.lhs, 4),
            rational::format_decimal(&r.rhs, 4),
            r.holds
        )
    };
    let one = rational::int(1);
    let (p51_ok, p51_text) = match &p51 {
        Ok(r) => {
            let row = r.verdict(Inequality::UpperUnshifted);
            (row.holds && row.rhs == one && row.lhs >= &one - &eps, describe(row))
        }
        Err(e) => (false, e.to_string()),
    };
    let (ctrl_ok, ctrl_text) = match &control {
        Ok(r) => {
            let row = r.verdict(Inequality::LowerUnshifted);
            (row.holds, describe(row))
        }
        Err(e) => (false, e.to_string()),
    };
    let (fast, time) = within(started.elapsed(), Duration::from_secs(30));
    outcome(
        p51_ok && ctrl_ok && fast,
        format!("P51_A(1,1) I=8 upper-unshifted {p51_text}; Residue(2,{{0}}) lower-unshifted {ctrl_text}; {time}"),
    )
}

/// `sign(m(m+ℓ) − ℓ²)`, the integer form of `sign(k(k+1) − 1)`.
fn golden_sign_oracle(l: u64, m: u64) -> Ordering {
    let (l, m) = (l as i128, m as i128);
    (m * (m + l)).cmp(&(l * l))
}

fn golden_crossover() -> Outcome {
    let started = Instant::now();
    let mut bad = Vec::new();
    let mut checked = 0;
    for l in 2..=12u64 {
        for m in 1..l {
            checked += 1;
            let want = golden_sign_oracle(l, m);
            match golden_ratio_comparison(l, m) {
                Ok(g)
                    if g.golden_sign == want
                        && g.shifted_order == want.reverse()
                        && g.unshifted_order == want.reverse() => {}
                Ok(g) => bad.push(format!(
                    "l={l} m={m}: {:?}/{:?} vs {want:?}",
                    g.shifted_order, g.unshifted_order
                )),
                Err(e) => bad.push(format!("l={l} m={m}: {e}")),
            }
        }
    }
    let (fast, time) = within(started.elapsed(), Duration::from_secs(1));
    outcome(
        bad.is_empty() && fast,
        format!("{checked} pairs, disagreements {bad:?}; {time}"),
    )
}

fn gap_density() -> Outcome {
    let started = Instant::now();
    let at = |p: u32| gap_density_check(1, 1, 4u64.pow(p), &budget());
    let (pass, detail) = match (at(10), at(12)) {
        (Ok(g10), Ok(g12)) => {
            let (a, b) = (rational::to_f64(&g10), rational::to_f64(&g12));
            (
                b <= GAP_TOL && g12 < g10,
                format!("4^10: {a:.4}, 4^12: {b:.4} (tol {GAP_TOL}), decreasing: {}", g12 < g10),
            )
        }
        (x, y) => (false, format!("{:?} / {:?}", x.err(), y.err())),
    };
    let (fast, time) = within(started.elapsed(), Duration::from_secs(30));
    outcome(pass && fast, format!("{detail}; {time}"))
}

fn positive_search() -> Outcome {
    let started = Instant::now();
    let n = 100_000;
    let set = SetSpec::residue(3, [0]).expect("valid");
    let spec = PatternSpec::new(1, 2, Relation::Weak).expect("valid");
    let run = || -> Result<(usize, bool, bool), String> {
        let a = truncate(&set, n).map_err(|e| e.to_string())?;
        let r = greedy_extend(&a, &spec, &SearchConfig::default()).map_err(|e| e.to_string())?;
        let cert = Certificate::from_search(&r, &set, n);
        let back = Certificate::from_toml_str(&cert.to_toml_string()).map_err(|e| e.to_string())?;
        let mut tampered = back.clone();
        if let Some(v) = tampered.values.first_mut() {
            *v += 1;
        }
        Ok((
            r.size(),
            back == cert && verify_certificate(&back).ok,
            !verify_certificate(&tampered).ok,
        ))
    };
    let result = run();
    let (fast, time) = within(started.elapsed(), Duration::from_secs(5));
    match result {
        Ok((size, verifies, tamper_caught)) => outcome(
            size >= 50 && verifies && tamper_caught && fast,
            format!("|B|={size}; certificate round-trips and verifies: {verifies}; tampered copy rejected: {tamper_caught}; {time}"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("threshold table", thresholds),
        ("family density convergence", family_density),
        ("oracle equivalence", oracle_equivalence),
        ("blocking verification", blocking),
        ("optimality signature", optimality_signature),
        ("shift normalization", shift_normalization),
        ("correspondence identities", identity_grid),
        ("measure inequalities", measure_inequalities),
        ("golden crossover", golden_crossover),
        ("gap density", gap_density),
        ("positive-side search", positive_search),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "ACCEPTANCE {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("ACCEPTANCE SUMMARY {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
