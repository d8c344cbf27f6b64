//! Subcommand bodies. Each returns the files to write and whether the run's
//! checks passed; nothing here touches the file system except reading inputs.

use sumsetlab::density::{
    banach_density_estimate, density_curve, golden_ratio_comparison, threshold, BanachEstimate, DensityReport,
    ThresholdId, WindowSequence,
};
use sumsetlab::families::{blocking_safe_start, blocking_scan, optimality_report, Construction, FamilyId};
use sumsetlab::patterns::{best_shift, verify_certificate, Certificate, Strategy};
use sumsetlab::rational::{self, Rational};
use sumsetlab::setkit::{truncate_with_budget, MemoryBudget};
use sumsetlab::symbolic::{inequality_report, verify_identity_sets, DensitySurrogate, Inequality};

use crate::manifest::{Loaded, SurrogateSpec};
use crate::output::{Header, Outputs};
use crate::Failure;

/// Default number of family windows when a manifest names a family but no windows.
const DEFAULT_FAMILY_WINDOWS: u64 = 8;
const DEFAULT_B1_MAX: u64 = 16;
const DEFAULT_BLOCKING_END: u64 = 65_536;
/// The identity check runs coordinate by coordinate; longer horizons add
/// little over this one.
const MAX_IDENTITY_HORIZON: u64 = 1_000_000;

pub struct Run {
    pub outputs: Outputs,
    /// False when a verification inside the run failed (exit 1).
    pub passed: bool,
    /// Short human-readable summary for stdout.
    pub summary: String,
}

fn frac_dec(r: &Rational) -> String {
    format!("{}\t{}", rational::format_fraction(r), rational::format_decimal(r, 12))
}

fn windows_for(l: &Loaded) -> Result<WindowSequence, Failure> {
    let m = &l.manifest;
    if let Some(w) = &m.windows {
        return Ok(w.clone());
    }
    if let Some(&n) = m.schedule.iter().max() {
        return Ok(WindowSequence::Prefixes { n });
    }
    if let Some(id) = &m.family {
        return Ok(WindowSequence::family_windows(id.base(), DEFAULT_FAMILY_WINDOWS));
    }
    Err(Failure::Usage("manifest needs windows, a schedule or a family".into()))
}

fn family_windows_for(l: &Loaded, id: &FamilyId) -> WindowSequence {
    l.manifest
        .windows
        .clone()
        .unwrap_or_else(|| WindowSequence::family_windows(id.base(), DEFAULT_FAMILY_WINDOWS))
}

fn density_summary(r: &DensityReport) -> String {
    let last = r.last();
    let mut s = format!(
        "horizon\t{}\nwindows\t{}\nfinal_ratio\t{}\nupper_estimate\t{}\nlower_estimate\t{}\ntail_from\t{}\n",
        last.endpoint,
        r.points.len(),
        frac_dec(&last.ratio),
        frac_dec(&r.upper_estimate),
        frac_dec(&r.lower_estimate),
        r.points[r.tail_start].endpoint
    );
    if let Some(b) = &r.banach {
        s.push_str(&format!("banach\t{}\t{}\n", b.length, frac_dec(&b.value)));
    }
    s
}

fn family_target_line(id: &FamilyId) -> String {
    let (notion, value) = id.target_density();
    format!("target\t{notion:?}\t{}\n", frac_dec(&value))
}

pub fn density(l: &Loaded, mem: &MemoryBudget) -> Result<Run, Failure> {
    let set = l.set()?;
    let windows = windows_for(l)?;
    let horizon = windows.horizon()?;
    let a = truncate_with_budget(&set, horizon, mem)?;
    let mut report = density_curve(&a, &windows)?;
    if let Some(len) = l.manifest.density.banach_length {
        report.banach = Some(BanachEstimate {
            length: len,
            value: banach_density_estimate(&a, len)?,
        });
    }
    let mut summary = format!("set\t{set}\n{}", density_summary(&report));
    if let Some(id) = &l.manifest.family {
        summary.push_str(&family_target_line(id));
    }
    let header = Header::for_manifest(&l.hash, &l.text);
    let name = &l.manifest.name;
    let mut outputs = Outputs::default();
    outputs.add(format!("{name}.density.tsv"), header.wrap(&report.to_tsv()));
    outputs.add(format!("{name}.summary.tsv"), header.wrap(&summary));
    Ok(Run {
        outputs,
        passed: true,
        summary,
    })
}

pub fn search(l: &Loaded, mem: &MemoryBudget) -> Result<Run, Failure> {
    let set = l.set()?;
    let pattern = l.pattern()?;
    let m = &l.manifest;
    if m.schedule.is_empty() {
        return Err(Failure::Usage("search needs a nonempty schedule".into()));
    }
    let strategy = m.search.strategy.unwrap_or(Strategy::BranchAndBound);
    let require_optimal = m.budgets.require_optimal;
    if require_optimal && strategy == Strategy::Greedy {
        return Err(Failure::Usage(
            "require_optimal needs branch_and_bound or brute_force".into(),
        ));
    }
    if m.search.shifts.as_ref().is_some_and(|s| s.is_empty()) {
        return Err(Failure::Usage("search.shifts must be nonempty when given".into()));
    }
    let cfg = l.search_config()?;
    let header = Header::for_manifest(&l.hash, &l.text);
    let mut outputs = Outputs::default();
    let mut tsv = String::from("n\tshift\tstrategy\tcandidate_bound\tsize\toptimal\tnodes\tbest\n");
    let mut summary = format!(
        "set\t{set}\npattern\tm={} l={} {} dilate={}\n",
        pattern.m, pattern.l, pattern.relation, pattern.dilate
    );
    let mut passed = true;
    for &n in &m.schedule {
        let a = truncate_with_budget(&set, n, mem)?;
        let table = best_shift(&a, &pattern, m.search.shifts.as_deref(), &cfg, strategy)?;
        let best_t = table.best_shift.expect("shift list is nonempty");
        for (t, r) in &table.rows {
            if require_optimal && !r.optimal {
                return Err(Failure::Resource(format!(
                    "search at N={n}, t={t} stopped after {} nodes without proving optimality",
                    r.nodes_expanded
                )));
            }
            tsv.push_str(&format!(
                "{n}\t{t}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                strategy_name(strategy),
                r.candidate_bound,
                r.size(),
                r.optimal,
                r.nodes_expanded,
                *t == best_t
            ));
        }
        let best = table.best().expect("shift list is nonempty");
        let cert = Certificate::from_search(best, &set, n);
        let check = verify_certificate(&cert);
        passed &= check.ok;
        summary.push_str(&format!(
            "n={n}\tbest_shift={}\tsize={}\toptimal={}\tcertificate={}\n",
            best_t,
            best.size(),
            best.optimal,
            if check.ok { "verified" } else { "FAILED" }
        ));
        outputs.add(
            format!("{}.n{n}.cert.toml", m.name),
            header.wrap(&cert.to_toml_string()),
        );
    }
    outputs.add(format!("{}.shifts.tsv", m.name), header.wrap(&tsv));
    outputs.add(format!("{}.summary.tsv", m.name), header.wrap(&summary));
    Ok(Run {
        outputs,
        passed,
        summary,
    })
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::Greedy => "greedy",
        Strategy::BranchAndBound => "branch_and_bound",
        Strategy::BruteForce => "brute_force",
    }
}

pub fn counterexample(l: &Loaded, mem: &MemoryBudget) -> Result<Run, Failure> {
    let m = &l.manifest;
    let id = m
        .family
        .ok_or_else(|| Failure::Usage("counterexample needs a family table".into()))?;
    let set = l.set()?;
    let header = Header::for_manifest(&l.hash, &l.text);
    let mut outputs = Outputs::default();

    let windows = family_windows_for(l, &id);
    let a = truncate_with_budget(&set, windows.horizon()?, mem)?;
    let density = density_curve(&a, &windows)?;
    let mut summary = format!(
        "family\t{id}\nset\t{set}\n{}{}",
        density_summary(&density),
        family_target_line(&id)
    );
    outputs.add(format!("{}.density.tsv", m.name), header.wrap(&density.to_tsv()));

    let mut passed = true;
    if matches!(id.construction(), Construction::P51_A | Construction::P71_A) {
        let b = &m.blocking;
        let t_max = b.t_max.unwrap_or(id.l() + id.m() - 1);
        let b1_max = b.b1_max.unwrap_or(DEFAULT_B1_MAX);
        let (n0, safe) = blocking_safe_start(&id, t_max, b1_max)?;
        let start = b.start.unwrap_or(safe);
        let end = b.end.unwrap_or(DEFAULT_BLOCKING_END.max(start));
        let report = blocking_scan(&id, t_max, b1_max, start, end, mem)?;
        passed = report.pass();
        summary.push_str(&format!(
            "blocking\t{}\nblocking_range\t{}\t{}\nblocking_t_max\t{t_max}\nblocking_b1_max\t{b1_max}\n\
             safe_index\t{n0}\nsafe_start\t{}\nreach\t{}\nanchors_checked\t{}\nviolations\t{}\n",
            if passed { "PASS" } else { "FAIL" },
            report.start,
            report.end,
            report.safe_start,
            frac_dec(&report.reach),
            report.anchors_checked,
            report.violations.len()
        ));
        outputs.add(format!("{}.blocking.tsv", m.name), header.wrap(&report.to_tsv()));
    } else {
        summary.push_str("blocking\tnot applicable (scans cover P51_A and P71_A)\n");
    }

    if let Some(opt) = &m.optimality {
        if m.schedule.is_empty() {
            return Err(Failure::Usage("optimality needs a nonempty schedule".into()));
        }
        let relation = opt.relation.unwrap_or(id.construction().relation());
        let cfg = l.search_config()?;
        let report = optimality_report(&id, relation, &m.schedule, &opt.extra_shifts, &cfg, mem)?;
        for &n in &m.schedule {
            summary.push_str(&format!("max_b\t{n}\t{}\n", report.max_size_at(n).unwrap_or(0)));
        }
        summary.push_str(&format!("all_optimal\t{}\n", report.all_optimal()));
        outputs.add(format!("{}.optimality.tsv", m.name), header.wrap(&report.to_tsv()));
    }
    outputs.add(format!("{}.summary.tsv", m.name), header.wrap(&summary));
    Ok(Run {
        outputs,
        passed,
        summary,
    })
}

pub fn correspond(l: &Loaded, mem: &MemoryBudget) -> Result<Run, Failure> {
    let m = &l.manifest;
    let set = l.set()?;
    let c = &m.correspond;
    let (lv, mv) = match (c.l, c.m, &m.family) {
        (Some(a), Some(b), _) => (a, b),
        (None, None, Some(id)) => (id.l(), id.m()),
        _ => {
            return Err(Failure::Usage(
                "correspond needs both correspond.l and correspond.m, or a family".into(),
            ))
        }
    };
    let windows = match &m.family {
        Some(id) => family_windows_for(l, id),
        None => windows_for(l)?,
    };
    let eps = l.epsilon()?;
    let surrogate = match &c.surrogate {
        None => DensitySurrogate::Empirical,
        Some(SurrogateSpec::Named(s)) if s == "empirical" => DensitySurrogate::Empirical,
        Some(SurrogateSpec::Named(s)) => {
            return Err(Failure::Usage(format!(
                "unknown surrogate {s:?}; use \"empirical\" or {{ upper, lower }}"
            )))
        }
        Some(SurrogateSpec::Exact { upper, lower }) => DensitySurrogate::Exact {
            upper: upper.clone(),
            lower: lower.clone(),
        },
    };
    let report = inequality_report(&set, lv, mv, &windows, &eps, &surrogate, mem)?;
    if report.windows.is_empty() {
        return Err(Failure::Usage("no window is long enough for the inequalities".into()));
    }
    let identity_horizon = windows.horizon()?.min(MAX_IDENTITY_HORIZON);
    let identity = verify_identity_sets(&set, lv, mv, identity_horizon)?;

    let mut summary = format!(
        "set\t{set}\nl\t{lv}\nm\t{mv}\nepsilon\t{}\nsurrogate\t{}\n",
        frac_dec(&eps),
        match &surrogate {
            DensitySurrogate::Empirical => "empirical".to_string(),
            DensitySurrogate::Exact { upper, lower } => format!(
                "exact upper={} lower={}",
                rational::format_fraction(upper),
                rational::format_fraction(lower)
            ),
        }
    );
    summary.push_str("inequality\tlhs\trhs\tmargin\tholds\tbest_window\tbest_margin\n");
    for which in Inequality::ALL {
        let v = report.verdict(which);
        let (w, best) = report.best_margin(which);
        summary.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            which.name(),
            rational::format_decimal(&v.lhs, 9),
            rational::format_decimal(&v.rhs, 9),
            rational::format_decimal(&v.margin, 9),
            v.holds,
            report.windows[w].index,
            rational::format_decimal(&best.margin, 9)
        ));
    }
    summary.push_str(&format!(
        "identities\t{}\thorizon={}\tdoubleprime_checked={}\tprime_checked={}\tmismatches={}\n",
        if identity.pass() { "PASS" } else { "FAIL" },
        identity.horizon,
        identity.doubleprime_checked,
        identity.prime_checked,
        identity.doubleprime_mismatches.len() + identity.prime_mismatches.len()
    ));

    let header = Header::for_manifest(&l.hash, &l.text);
    let mut outputs = Outputs::default();
    outputs.add(format!("{}.inequalities.tsv", m.name), header.wrap(&report.to_tsv()));
    outputs.add(
        format!("{}.frequencies.tsv", m.name),
        header.wrap(&report.frequencies_tsv()),
    );
    outputs.add(format!("{}.summary.tsv", m.name), header.wrap(&summary));
    Ok(Run {
        outputs,
        passed: identity.pass(),
        summary,
    })
}

pub fn thresholds(l: u64, m: u64) -> String {
    let mut s = String::from("id\tnotion\tpattern\tvalue\tdecimal\n");
    for id in ThresholdId::ALL {
        let (value, decimal) = match threshold(id, l, m) {
            Ok(v) => (rational::format_fraction(&v), rational::format_decimal(&v, 12)),
            Err(e) => ("-".to_string(), e.to_string()),
        };
        s.push_str(&format!(
            "{id}\t{:?}\t{}\t{value}\t{decimal}\n",
            id.notion(),
            id.pattern()
        ));
    }
    s
}

/// Table over `2 ≤ ℓ ≤ l_max`, `1 ≤ m < ℓ`; the flag is false if any row is
/// inconsistent with the sign of `k(k+1) − 1`.
pub fn golden(l_max: u64) -> Result<(String, bool), Failure> {
    let mut s = String::from(
        "l\tm\tk\tdistinct_shifted\tweak_shifted\tshifted_order\tdistinct_unshifted\tweak_unshifted\tunshifted_order\tgolden_sign\tconsistent\n",
    );
    let mut ok = true;
    for l in 2..=l_max {
        for m in 1..l {
            let g = golden_ratio_comparison(l, m)?;
            ok &= g.consistent();
            s.push_str(&format!(
                "{l}\t{m}\t{}\t{}\t{}\t{:?}\t{}\t{}\t{:?}\t{:?}\t{}\n",
                rational::format_fraction(&g.k),
                rational::format_fraction(&g.distinct_shifted),
                rational::format_fraction(&g.weak_shifted),
                g.shifted_order,
                rational::format_fraction(&g.distinct_unshifted),
                rational::format_fraction(&g.weak_unshifted),
                g.unshifted_order,
                g.golden_sign,
                g.consistent()
            ));
        }
    }
    Ok((s, ok))
}
