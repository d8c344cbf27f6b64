//! Experiment manifests: one TOML file describes a reproducible run.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use sumsetlab::density::WindowSequence;
use sumsetlab::families::{build_counterexample, FamilyId};
use sumsetlab::patterns::{GreedyOrder, PatternSpec, Relation, SearchConfig, Strategy};
use sumsetlab::rational::{self, Rational};
use sumsetlab::setkit::{MemoryBudget, SetSpec};

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Prefix of every output file name.
    pub name: String,
    /// Relative paths resolve against the manifest's directory.
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, with = "rational::serde_opt_str")]
    pub epsilon: Option<Rational>,
    #[serde(default)]
    pub schedule: Vec<u64>,
    pub set: Option<SetSpec>,
    pub set_file: Option<PathBuf>,
    pub family: Option<FamilyId>,
    pub random_set: Option<RandomSet>,
    pub pattern: Option<PatternSpec>,
    pub windows: Option<WindowSequence>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub density: DensitySection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub blocking: BlockingSection,
    pub optimality: Option<OptimalitySection>,
    #[serde(default)]
    pub correspond: CorrespondSection,
}

/// Each `x ∈ [1, horizon]` is kept with probability `density`, drawn from
/// ChaCha8 seeded with the manifest seed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSet {
    #[serde(with = "rational::serde_str")]
    pub density: Rational,
    pub horizon: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub node_budget: Option<u64>,
    pub time_budget_secs: Option<f64>,
    /// Byte count with optional K/M/G suffix; the tighter of this and
    /// `SUMSETLAB_MAX_MEM` applies.
    pub max_mem: Option<String>,
    /// Exit 3 instead of writing results when a search stops on its budget.
    #[serde(default)]
    pub require_optimal: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    /// Also report the best window of this length.
    pub banach_length: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub strategy: Option<Strategy>,
    pub candidate_bound: Option<u64>,
    /// Defaults to every residue `0..ℓ+m`.
    pub shifts: Option<Vec<u64>>,
    pub greedy_order: Option<GreedyOrder>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockingSection {
    pub t_max: Option<u64>,
    pub b1_max: Option<u64>,
    /// Defaults to the safe start.
    pub start: Option<u64>,
    pub end: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalitySection {
    pub relation: Option<Relation>,
    #[serde(default)]
    pub extra_shifts: Vec<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondSection {
    pub l: Option<u64>,
    pub m: Option<u64>,
    pub surrogate: Option<SurrogateSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SurrogateSpec {
    /// Only `"empirical"` is accepted.
    Named(String),
    Exact {
        #[serde(with = "rational::serde_str")]
        upper: Rational,
        #[serde(with = "rational::serde_str")]
        lower: Rational,
    },
}

/// A parsed manifest together with the bytes it came from.
pub struct Loaded {
    pub manifest: Manifest,
    pub text: String,
    pub hash: String,
    pub dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("invalid manifest {}: {e}", path.display())))?;
    let valid_name = !manifest.name.is_empty()
        && manifest
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if !valid_name {
        return Err(Failure::Usage(format!(
            "manifest name {:?} must be nonempty and use only letters, digits, '-', '_' and '.'",
            manifest.name
        )));
    }
    if manifest.schedule.contains(&0) {
        return Err(Failure::Usage("schedule entries must be positive".into()));
    }
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded {
        hash: sha256_hex(text.as_bytes()),
        manifest,
        text,
        dir,
    })
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    /// The single set source the manifest names.
    pub fn set(&self) -> Result<SetSpec, Failure> {
        let m = &self.manifest;
        let given = [
            m.set.is_some(),
            m.set_file.is_some(),
            m.family.is_some(),
            m.random_set.is_some(),
        ];
        match given.iter().filter(|&&g| g).count() {
            0 => {
                return Err(Failure::Usage(
                    "manifest needs one of set, set_file, family, random_set".into(),
                ))
            }
            1 => {}
            _ => {
                return Err(Failure::Usage(
                    "set, set_file, family and random_set are mutually exclusive".into(),
                ))
            }
        }
        if let Some(s) = &m.set {
            return Ok(s.clone());
        }
        if let Some(f) = &m.set_file {
            let path = self.resolve(f);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("cannot read set file {}: {e}", path.display())))?;
            return SetSpec::from_toml_str(&text)
                .map_err(|e| Failure::Usage(format!("invalid set file {}: {e}", path.display())));
        }
        if let Some(id) = &m.family {
            return Ok(build_counterexample(id));
        }
        let r = m.random_set.as_ref().expect("one source is present");
        random_set(r, m.seed)
    }

    pub fn pattern(&self) -> Result<PatternSpec, Failure> {
        self.manifest
            .pattern
            .ok_or_else(|| Failure::Usage("manifest needs a pattern table".into()))
    }

    pub fn epsilon(&self) -> Result<Rational, Failure> {
        let eps = self.manifest.epsilon.clone().unwrap_or_else(|| rational::rat(1, 20));
        if eps <= rational::int(0) {
            return Err(Failure::Usage("epsilon must be positive".into()));
        }
        Ok(eps)
    }

    pub fn memory(&self, env: MemoryBudget) -> Result<MemoryBudget, Failure> {
        match &self.manifest.budgets.max_mem {
            None => Ok(env),
            Some(s) => {
                let own = MemoryBudget::parse(s).map_err(|e| Failure::Usage(format!("budgets.max_mem: {e}")))?;
                Ok(MemoryBudget {
                    max_bytes: own.max_bytes.min(env.max_bytes),
                })
            }
        }
    }

    pub fn search_config(&self) -> Result<SearchConfig, Failure> {
        let m = &self.manifest;
        let mut cfg = SearchConfig {
            candidate_bound: m.search.candidate_bound,
            ..SearchConfig::default()
        };
        if let Some(n) = m.budgets.node_budget {
            cfg.node_budget = n;
        }
        if let Some(s) = m.budgets.time_budget_secs {
            if !(s.is_finite() && s > 0.0) {
                return Err(Failure::Usage("budgets.time_budget_secs must be positive".into()));
            }
            cfg.time_budget = Some(std::time::Duration::from_secs_f64(s));
        }
        if let Some(o) = m.search.greedy_order {
            cfg.greedy_order = o;
        }
        Ok(cfg)
    }
}

fn random_set(r: &RandomSet, seed: u64) -> Result<SetSpec, Failure> {
    let zero = rational::int(0);
    if r.density < zero || r.density > rational::int(1) {
        return Err(Failure::Usage("random_set.density must lie in [0, 1]".into()));
    }
    let (num, den) = (
        rational::saturating_u64(r.density.numer()),
        rational::saturating_u64(r.density.denom()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = (1..=r.horizon).filter(|_| rng.gen_range(0..den) < num);
    SetSpec::explicit(members).map_err(|e| Failure::Usage(e.to_string()))
}
