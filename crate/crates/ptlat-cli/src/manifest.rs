//! Run directories and result manifests.
//!
//! Every run writes into `<output_dir>/<experiment>/<timestamp>/`: the data
//! artifacts, a `config.toml` echo of the fully resolved configuration, and
//! a `manifest.json` recording artifact hashes, notes, and a summary. The
//! artifact bytes are a pure function of the configuration (timestamps live
//! only in the manifest), so identical configs produce identical hashes.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    /// Binary name and version that produced the run.
    tool: String,
    /// Version of the underlying simulation library.
    library: &'static str,
    experiment: &'static str,
    created_utc: String,
    wall_clock_seconds: f64,
    /// Fully resolved configuration; rerunning it reproduces every artifact
    /// hash below, independent of worker count.
    config: &'a RunConfig,
    /// Decisions baked into this run (preset pinning, scaled-down sizes).
    notes: &'a [String],
    /// Experiment-specific headline numbers.
    summary: serde_json::Value,
    artifacts: &'a [ArtifactRecord],
}

/// A freshly created, uniquely named run directory collecting artifacts.
pub struct RunDir {
    dir: PathBuf,
    started: Instant,
    artifacts: Vec<ArtifactRecord>,
}

impl RunDir {
    /// Creates `<root>/<experiment>/<UTC timestamp>/`, suffixing the stamp
    /// if two runs land in the same nanosecond.
    pub fn create(root: &Path, experiment: &str) -> Result<Self, CliError> {
        let base = root.join(experiment);
        std::fs::create_dir_all(&base)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", base.display())))?;
        // Colons are awkward in paths on some filesystems; keep the stamp
        // RFC 3339-shaped but filesystem-safe.
        let stamp =
            humantime::format_rfc3339_nanos(SystemTime::now()).to_string().replace(':', "-");
        let mut dir = base.join(&stamp);
        let mut bump = 0u32;
        loop {
            match std::fs::create_dir(&dir) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    bump += 1;
                    dir = base.join(format!("{stamp}-{bump}"));
                }
                Err(e) => {
                    return Err(CliError::Runtime(format!(
                        "cannot create {}: {e}",
                        dir.display()
                    )))
                }
            }
        }
        Ok(RunDir { dir, started: Instant::now(), artifacts: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes one artifact and records its size and SHA-256.
    pub fn write_artifact(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        let digest = Sha256::digest(bytes);
        self.artifacts.push(ArtifactRecord {
            file: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: format!("{digest:x}"),
        });
        println!("wrote {}", path.display());
        Ok(())
    }

    /// Writes `config.toml` + `manifest.json` and closes the run.
    pub fn finish(
        mut self,
        cfg: &RunConfig,
        notes: &[String],
        summary: serde_json::Value,
    ) -> Result<(), CliError> {
        let config_toml = toml::to_string_pretty(cfg)
            .map_err(|e| CliError::Runtime(format!("serializing config: {e}")))?;
        self.write_artifact("config.toml", config_toml.as_bytes())?;

        let manifest = Manifest {
            tool: format!("ptlat {}", env!("CARGO_PKG_VERSION")),
            library: ptlat::VERSION,
            experiment: cfg.experiment.dir_name(),
            created_utc: humantime::format_rfc3339_nanos(SystemTime::now()).to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            config: cfg,
            notes,
            summary,
            artifacts: &self.artifacts,
        };
        let json = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::Runtime(format!("serializing manifest: {e}")))?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, &json)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}
