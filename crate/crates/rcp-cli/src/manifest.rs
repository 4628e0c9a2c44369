//! Run manifests: a flat key=value record written next to every run's
//! outputs, capturing the subcommand, the fully resolved parameters,
//! the output paths, the tool version, and the wall-clock duration.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use rcp_core::{Error, Result};

/// Record of one completed run.
pub struct RunManifest {
    /// Subcommand name as typed on the command line.
    pub subcommand: &'static str,
    /// Resolved parameters (defaults filled in), in declaration order.
    pub params: Vec<(String, String)>,
    /// Output file paths, as written.
    pub outputs: Vec<String>,
    /// Wall-clock duration of the run.
    pub duration: Duration,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "subcommand={}", self.subcommand);
        let _ = writeln!(out, "version={}", env!("CARGO_PKG_VERSION"));
        for (key, value) in &self.params {
            let _ = writeln!(out, "{key}={value}");
        }
        for path in &self.outputs {
            let _ = writeln!(out, "output={path}");
        }
        let _ = writeln!(out, "duration_seconds={:.3}", self.duration.as_secs_f64());
        out
    }

    /// File name the manifest is written under:
    /// `<subcommand>_manifest.txt` with dashes flattened.
    pub fn file_name(&self) -> String {
        format!("{}_manifest.txt", self.subcommand.replace('-', "_"))
    }
}

/// Writes `contents` under `out_dir/name`, mapping I/O failures onto a
/// configuration error naming `out_dir`.
pub fn write_output(out_dir: &Path, name: &str, contents: &str) -> Result<String> {
    std::fs::create_dir_all(out_dir).map_err(|e| {
        Error::config(
            "out_dir",
            format!("cannot create {}: {e}", out_dir.display()),
        )
    })?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::config("out_dir", format!("cannot write {}: {e}", path.display())))?;
    Ok(path.display().to_string())
}
