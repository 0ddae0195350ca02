//! Deterministic artifact emission.
//!
//! Every CSV starts with a `#`-prefixed metadata header carrying the
//! command name, the SHA-256 of the run configuration, and the column
//! list, so a table can always be traced back to the exact run that
//! produced it. Floats are printed with Rust's shortest round-trip
//! formatting, which makes identical runs byte-identical.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Write one CSV table with the standard metadata header.
pub fn write_csv(
    path: &Path,
    command: &str,
    config_sha256: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut buf = String::new();
    buf.push_str(&format!("# wirefield {command}\n"));
    buf.push_str(&format!("# config_sha256 = {config_sha256}\n"));
    buf.push_str(&format!("# columns = {}\n", columns.join(",")));
    buf.push_str(&columns.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let mut first = true;
        for v in row {
            if !first {
                buf.push(',');
            }
            first = false;
            buf.push_str(&format!("{v}"));
        }
        buf.push('\n');
    }
    write_artifact(path, buf.as_bytes())
}

/// Write one pretty-printed JSON artifact.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize {}: {e}", path.display())))?;
    bytes.push(b'\n');
    write_artifact(path, &bytes)
}

fn write_artifact(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Numerical(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))
}

/// Run record echoed as JSON on stdout after the artifacts are on disk.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub versions: Versions,
    pub config_sha256: String,
    /// Effective inputs: the parsed config, or the flag values for
    /// flag-driven commands.
    pub inputs: serde_json::Value,
    /// RNG seed for seeded commands, absent otherwise.
    pub seed: Option<u64>,
    pub threads: usize,
    pub artifacts: Vec<PathBuf>,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub wirefield: &'static str,
}

impl Manifest {
    pub fn print(&self) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Numerical(format!("cannot serialize manifest: {e}")))?;
        println!("{text}");
        Ok(())
    }
}
