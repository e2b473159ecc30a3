//! One directory per run plus a manifest listing what was written.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ham_core::algebra::rational::format_rational;
use ham_core::algebra::Rational;
use ham_core::Result;
use serde::Serialize;

use crate::config::RunConfig;

pub struct RunDir {
    pub path: PathBuf,
    files: Vec<String>,
}

/// `fbsdeNd(4)` -> `fbsdeNd4`, `-7/10` -> `-7over10`.
fn slug(s: &str) -> String {
    s.replace('/', "over").chars().filter(|c| c.is_ascii_alphanumeric() || "-_.".contains(*c)).collect()
}

impl RunDir {
    /// `<out>/<problem>_<order>_<c0>`.
    pub fn create(out: &Path, problem: &str, order: &str, c0: &Rational) -> Result<Self> {
        let name = format!("{}_{}_{}", slug(problem), order, slug(&format_rational(c0)));
        let path = out.join(name);
        fs::create_dir_all(&path)?;
        Ok(Self { path, files: Vec::new() })
    }

    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// Writes `manifest.json` last so it lists every other file.
    pub fn finish(mut self, command: &str, config: &RunConfig) -> Result<PathBuf> {
        let files = std::mem::take(&mut self.files);
        let manifest = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "files": files,
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(self.path)
    }
}
