//! Run-directory plumbing: manifests, CSV emission with fixed float
//! formatting (so identical configs produce byte-identical files), and
//! companion gnuplot scripts.

use crate::CliError;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits: round-trips f64 exactly and is byte-stable.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(path).map_err(|e| {
            CliError::Config(format!("cannot create output dir {}: {e}", path.display()))
        })?;
        Ok(Self { path: path.to_path_buf() })
    }

    fn io(&self, name: &str, e: std::io::Error) -> CliError {
        CliError::Solver(format!("writing {}/{name}: {e}", self.path.display()))
    }

    /// Full resolved config + code version + tolerances; enough to
    /// reproduce the run bit-identically with the same build.
    pub fn manifest(
        &self,
        command: &str,
        resolved: Map<String, Value>,
        workers: usize,
        tolerances: Value,
    ) -> Result<(), CliError> {
        let doc = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "workers": workers,
            "config": Value::Object(resolved),
            "tolerances": tolerances,
        });
        self.json("manifest.json", &doc)
    }

    pub fn json(&self, name: &str, doc: &impl serde::Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(doc)
            .map_err(|e| CliError::Solver(format!("serializing {name}: {e}")))?;
        std::fs::write(self.path.join(name), text + "\n").map_err(|e| self.io(name, e))
    }

    pub fn csv<R, I>(&self, name: &str, header: &str, rows: I) -> Result<(), CliError>
    where
        R: AsRef<str>,
        I: IntoIterator<Item = R>,
    {
        let file = std::fs::File::create(self.path.join(name)).map_err(|e| self.io(name, e))?;
        let mut w = std::io::BufWriter::new(file);
        (|| -> std::io::Result<()> {
            writeln!(w, "{header}")?;
            for row in rows {
                writeln!(w, "{}", row.as_ref())?;
            }
            w.flush()
        })()
        .map_err(|e| self.io(name, e))
    }

    /// Plain-text plotting companion; contains no computation.
    pub fn gnuplot(&self, name: &str, script: &str) -> Result<(), CliError> {
        std::fs::write(self.path.join(name), script).map_err(|e| self.io(name, e))
    }
}

/// Deterministic linear grid including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Log-spaced grid including both ends.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.log10(), b.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}
