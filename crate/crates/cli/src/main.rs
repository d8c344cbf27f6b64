//! `sumsetlab`: manifest-driven experiments on sumset patterns.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or invalid
//! input, 3 resource limit.

mod commands;
mod manifest;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sumsetlab::patterns::{verify_certificate, Certificate};
use sumsetlab::setkit::MemoryBudget;

use output::{Header, Outputs};

pub const MAX_MEM_ENV: &str = "SUMSETLAB_MAX_MEM";

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Resource(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) | Failure::Io(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verification(m) | Failure::Resource(m) | Failure::Io(m) => m,
        }
    }
}

impl From<sumsetlab::Error> for Failure {
    fn from(e: sumsetlab::Error) -> Self {
        match e {
            sumsetlab::Error::Resource { .. } => Failure::Resource(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sumsetlab",
    version,
    about = "Experiments on sumset patterns inside integer sets"
)]
struct Cli {
    /// Worker threads for parallel scans (default: one per core). Outputs do
    /// not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density curve of a set along a window sequence.
    Density(ManifestArgs),
    /// Largest pattern witness B, with one certificate per N.
    Search(ManifestArgs),
    /// Re-check a certificate written by `search`.
    VerifyCert { certificate: PathBuf },
    /// Density, blocking scan and optional growth curve of a counterexample family.
    Counterexample(ManifestArgs),
    /// Correspondence points, orbit frequencies and measure inequalities.
    Correspond(ManifestArgs),
    /// Every closed-form density threshold at (l, m).
    Thresholds {
        #[arg(long)]
        l: u64,
        #[arg(long)]
        m: u64,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distinct-pair versus weak-pair thresholds for 2 <= l <= l_max, m < l.
    Golden {
        #[arg(long, default_value_t = 12)]
        l_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ManifestArgs {
    manifest: PathBuf,
    /// Output directory; overrides the manifest's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn env_memory() -> Result<MemoryBudget, Failure> {
    match std::env::var(MAX_MEM_ENV) {
        Ok(s) => MemoryBudget::parse(&s).map_err(|e| Failure::Usage(format!("{MAX_MEM_ENV}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(MemoryBudget::default()),
        Err(e) => Err(Failure::Usage(format!("{MAX_MEM_ENV}: {e}"))),
    }
}

/// Stdout is informational only; a closed pipe must not abort a run.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn manifest_run(
    args: &ManifestArgs,
    body: fn(&manifest::Loaded, &MemoryBudget) -> Result<commands::Run, Failure>,
) -> Result<(), Failure> {
    let loaded = manifest::load(&args.manifest)?;
    let mem = loaded.memory(env_memory()?)?;
    let out_dir = match (&args.out, &loaded.manifest.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(d)) => loaded.resolve(d),
        (None, None) => loaded.resolve(Path::new("out")),
    };
    let run = body(&loaded, &mem)?;
    let written = run.outputs.commit(&out_dir)?;
    emit(&run.summary);
    for p in written {
        emit(&format!("wrote {}\n", p.display()));
    }
    if run.passed {
        Ok(())
    } else {
        Err(Failure::Verification(
            "a check in this run failed; see the summary".into(),
        ))
    }
}

fn one_shot(invocation: &str, body: &str, out: Option<&Path>) -> Result<(), Failure> {
    let text = Header::for_invocation(invocation).wrap(body);
    if let Some(path) = out {
        let dir = path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let name = path
            .file_name()
            .ok_or_else(|| Failure::Usage(format!("{} is not a file path", path.display())))?;
        let mut o = Outputs::default();
        o.add(name.to_string_lossy(), text.clone());
        o.commit(dir)?;
    }
    emit(&text);
    Ok(())
}

fn verify_cert(path: &Path) -> Result<(), Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cert = Certificate::from_toml_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let check = verify_certificate(&cert);
    if check.ok {
        emit(&format!(
            "certificate OK: |B|={} N={} values={} optimal={}\n",
            cert.b.len(),
            cert.n,
            cert.values.len(),
            cert.optimal
        ));
        Ok(())
    } else {
        for p in &check.problems {
            emit(&format!("problem: {p}\n"));
        }
        Err(Failure::Verification(format!(
            "certificate {} does not verify",
            path.display()
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Density(a) => manifest_run(a, commands::density),
        Command::Search(a) => manifest_run(a, commands::search),
        Command::Counterexample(a) => manifest_run(a, commands::counterexample),
        Command::Correspond(a) => manifest_run(a, commands::correspond),
        Command::VerifyCert { certificate } => verify_cert(certificate),
        Command::Thresholds { l, m, out } => {
            if *l == 0 || *m == 0 {
                return Err(Failure::Usage("l and m must be at least 1".into()));
            }
            one_shot(
                &format!("thresholds l={l} m={m}"),
                &commands::thresholds(*l, *m),
                out.as_deref(),
            )
        }
        Command::Golden { l_max, out } => {
            let (table, ok) = commands::golden(*l_max)?;
            one_shot(&format!("golden l_max={l_max}"), &table, out.as_deref())?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Verification("golden comparison inconsistent".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = writeln!(std::io::stderr(), "sumsetlab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
