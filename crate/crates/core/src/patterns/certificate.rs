//! Plain-text witness certificates that can be re-checked without searching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setkit::SetSpec;

use super::search::{SearchResult, Strategy};
use super::{pattern_values, PatternSpec};

pub const CERTIFICATE_VERSION: u32 = 1;

/// A witness `B` together with every pattern value and its membership in `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    /// Truncation length the search ran at.
    pub n: u64,
    pub candidate_bound: u64,
    pub strategy: Strategy,
    pub optimal: bool,
    pub nodes_expanded: u64,
    pub b: Vec<u64>,
    pub values: Vec<u64>,
    /// `memberships[i]` records `values[i] ∈ A`.
    pub memberships: Vec<bool>,
    pub pattern: PatternSpec,
    pub set: SetSpec,
}

impl Certificate {
    pub fn from_search(result: &SearchResult, set: &SetSpec, n: u64) -> Certificate {
        Certificate {
            version: CERTIFICATE_VERSION,
            n,
            candidate_bound: result.candidate_bound,
            strategy: result.strategy,
            optimal: result.optimal,
            nodes_expanded: result.nodes_expanded,
            b: result.b.clone(),
            memberships: result.values.iter().map(|&v| set.contains(v)).collect(),
            values: result.values.clone(),
            pattern: result.spec,
            set: set.clone(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("certificates always serialize")
    }

    pub fn from_toml_str(s: &str) -> Result<Certificate> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateCheck {
    pub ok: bool,
    /// One line per failed check; empty iff `ok`.
    pub problems: Vec<String>,
}

const MAX_LISTED: usize = 20;

/// Recomputes the value list from `B` and re-tests each value against the
/// set description (not a stored truncation).
pub fn verify_certificate(cert: &Certificate) -> CertificateCheck {
    let mut problems = Vec::new();
    let mut push = |p: String| {
        if problems.len() < MAX_LISTED {
            problems.push(p);
        }
    };
    if cert.version != CERTIFICATE_VERSION {
        push(format!("unsupported certificate version {}", cert.version));
    }
    let spec = &cert.pattern;
    let top = (spec.m + spec.l)
        .checked_mul(cert.candidate_bound)
        .and_then(|v| v.checked_add(spec.shift));
    if top.is_none_or(|v| v > cert.n) {
        push(format!(
            "candidate bound {} lets pattern values exceed N={}",
            cert.candidate_bound, cert.n
        ));
    }
    if let Some(&last) = cert.b.last() {
        if last > cert.candidate_bound {
            push(format!(
                "element {last} of B exceeds the candidate bound {}",
                cert.candidate_bound
            ));
        }
    }
    match pattern_values(&cert.b, spec) {
        Err(e) => push(format!("B is malformed: {e}")),
        Ok(values) => {
            if values != cert.values {
                let first = values
                    .iter()
                    .zip(&cert.values)
                    .position(|(x, y)| x != y)
                    .unwrap_or(values.len().min(cert.values.len()));
                push(format!(
                    "value list differs from the recomputed one at position {first} ({} recomputed, {} listed)",
                    values.len(),
                    cert.values.len()
                ));
            }
            for &v in &values {
                if v > cert.n {
                    push(format!("value {v} exceeds N={}", cert.n));
                } else if !cert.set.contains(v) {
                    push(format!("value {v} is not in A"));
                }
            }
        }
    }
    if cert.memberships.len() != cert.values.len() {
        push(format!(
            "{} membership entries for {} values",
            cert.memberships.len(),
            cert.values.len()
        ));
    }
    for (v, ok) in cert.values.iter().zip(&cert.memberships) {
        if !ok {
            push(format!("value {v} is recorded as outside A"));
        }
    }
    CertificateCheck {
        ok: problems.is_empty(),
        problems,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{greedy_extend, Relation, SearchConfig};
    use crate::setkit::truncate;

    fn sample() -> Certificate {
        let set = SetSpec::residue(3, [0]).unwrap();
        let spec = PatternSpec::new(1, 2, Relation::Weak).unwrap();
        let a = truncate(&set, 100).unwrap();
        let r = greedy_extend(&a, &spec, &SearchConfig::default()).unwrap();
        Certificate::from_search(&r, &set, 100)
    }

    #[test]
    fn round_trip_and_verify() {
        let c = sample();
        let text = c.to_toml_string();
        let back = Certificate::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
        let check = verify_certificate(&back);
        assert!(check.ok, "{:?}", check.problems);
        assert_eq!(c.b.len(), 11);
    }

    #[test]
    fn tampered_value_is_caught() {
        let mut c = sample();
        c.values[3] += 1;
        assert!(!verify_certificate(&c).ok);
    }

    #[test]
    fn tampered_witness_is_caught() {
        let mut c = sample();
        c.b[2] += 1;
        let check = verify_certificate(&c);
        assert!(!check.ok);
        assert!(!check.problems.is_empty());
    }

    #[test]
    fn foreign_set_is_caught() {
        let mut c = sample();
        c.set = SetSpec::residue(3, [1]).unwrap();
        assert!(!verify_certificate(&c).ok);
    }

    #[test]
    fn empty_witness_verifies() {
        let set = SetSpec::empty();
        let spec = PatternSpec::new(1, 1, Relation::Weak).unwrap();
        let a = truncate(&set, 50).unwrap();
        let r = greedy_extend(&a, &spec, &SearchConfig::default()).unwrap();
        let c = Certificate::from_search(&r, &set, 50);
        assert!(c.b.is_empty());
        assert!(verify_certificate(&c).ok);
    }
}
