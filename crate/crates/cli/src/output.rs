//! Output files: every file starts with the tool version and the hash of the
//! input that produced it, and nothing is written until every file is ready.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::Failure;

pub const VERSION_LINE: &str = concat!("sumsetlab ", env!("CARGO_PKG_VERSION"));

/// Provenance lines shared by all files of one run.
pub struct Header {
    lines: String,
}

impl Header {
    /// For manifest-driven runs: hash plus the manifest itself.
    pub fn for_manifest(hash: &str, text: &str) -> Header {
        let mut lines = format!("# {VERSION_LINE}\n# manifest sha256:{hash}\n");
        for l in text.lines() {
            lines.push_str("# | ");
            lines.push_str(l);
            lines.push('\n');
        }
        Header { lines }
    }

    /// For one-shot commands: the hash covers the canonical argument string.
    pub fn for_invocation(invocation: &str) -> Header {
        let hash = crate::manifest::sha256_hex(invocation.as_bytes());
        Header {
            lines: format!("# {VERSION_LINE}\n# manifest sha256:{hash}\n# | {invocation}\n"),
        }
    }

    pub fn wrap(&self, body: &str) -> String {
        format!("{}{body}", self.lines)
    }
}

/// Files of one run, held in memory until [`Outputs::commit`].
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// Writes each file through a temporary sibling and a rename.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
        let io = |what: &str, p: &Path, e: std::io::Error| Failure::Io(format!("{what} {}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
        let mut written = Vec::new();
        for (name, contents) in self.files {
            let path = dir.join(&name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io("cannot write into", dir, e))?;
            tmp.write_all(contents.as_bytes())
                .map_err(|e| io("cannot write", &path, e))?;
            tmp.persist(&path).map_err(|e| io("cannot create", &path, e.error))?;
            written.push(path);
        }
        Ok(written)
    }
}
