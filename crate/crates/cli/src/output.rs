//! Output directory bookkeeping: format filtering, atomic writes and the run
//! manifest listing every file produced.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};
use tori_core::io::{atomic_write, atomic_write_with, config_hash, write_json};
use tori_core::solver::{write_checkpoint, Checkpoint};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

/// Bumped whenever a CSV/JSON/binary layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub struct Output {
    dir: PathBuf,
    formats: BTreeSet<Format>,
    written: Mutex<BTreeSet<String>>,
}

impl Output {
    pub fn create(config: &ExperimentConfig) -> Result<Self, CliError> {
        let dir = config.output_dir().to_owned();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            formats: config.formats.clone(),
            written: Mutex::new(BTreeSet::new()),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn note(&self, name: &str) {
        self.written.lock().expect("not poisoned").insert(name.to_owned());
    }

    pub fn csv<F>(&self, name: &str, render: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        if self.wants(Format::Csv) {
            atomic_write_with(&self.dir.join(name), render)?;
            self.note(name);
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        if self.wants(Format::Json) {
            self.report(name, value)?;
        }
        Ok(())
    }

    /// JSON written regardless of `formats` (reports and manifests).
    pub fn report<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.note(name);
        Ok(())
    }

    pub fn svg(&self, name: &str, render: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.wants(Format::SvgPlotData) {
            atomic_write(&self.dir.join(name), render().as_bytes())?;
            self.note(name);
        }
        Ok(())
    }

    pub fn checkpoint(&self, name: &str, chk: &Checkpoint, meta: &Value) -> Result<(), CliError> {
        if self.wants(Format::Binary) {
            write_checkpoint(&self.dir.join(name), chk, Some(meta))?;
            self.note(name);
            self.note(&format!("{name}.json"));
        }
        Ok(())
    }

    /// `manifest.json`: config, its hash, versions and the produced files.
    pub fn manifest(&self, config: &ExperimentConfig, summary: Value) -> Result<(), CliError> {
        let files: Vec<String> = self.written.lock().expect("not poisoned").iter().cloned().collect();
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "core_version": tori_core::VERSION,
            "experiment": config.experiment,
            "config_hash": hash(config)?,
            "config": config,
            "files": files,
            "summary": summary,
        });
        write_json(&self.dir.join("manifest.json"), &manifest)?;
        Ok(())
    }
}

/// Hash of the configuration with the output location removed, so moving
/// a run elsewhere does not change its identity.
pub fn hash(config: &ExperimentConfig) -> Result<String, CliError> {
    let mut c = config.clone();
    c.output_dir = None;
    Ok(config_hash(&c)?)
}

/// Writes `error.json` into the output directory when one is known.
pub fn write_error(dir: Option<&Path>, err: &CliError) {
    if let Some(dir) = dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = write_json(&dir.join("error.json"), &err.to_json());
        }
    }
}
