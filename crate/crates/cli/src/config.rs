//! Experiment configuration: built-in defaults, overlaid by a JSON file,
//! overlaid by `--set key=value` flags. Keys unknown to the defaults are
//! rejected, so a typo cannot silently fall back to a default.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tori_core::resonance::{FractionMode, WindowNorm, DEFAULT_SEARCH_BOX};
use tori_core::solver::SimulationConfig;
use tori_core::truncated::Sign;
use tori_core::TorusSpec;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    ThresholdStudy,
    Kinematic,
    PrecisionAudit,
    Truncated,
    Convergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Binary,
    #[serde(alias = "svg")]
    SvgPlotData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Set from the subcommand; a config file naming another kind is an error.
    pub experiment: Option<Experiment>,
    #[serde(flatten)]
    pub simulation: SimulationConfig,
    /// Threshold levels as multiples of `R`: `ε = e·R`.
    pub epsilon_list: Vec<f64>,
    pub r_list: Vec<f64>,
    /// Tori compared by the threshold study and the kinematic maps.
    pub study_tori: Vec<TorusSpec>,
    pub output_dir: Option<PathBuf>,
    pub formats: BTreeSet<Format>,
    /// Directory holding `checkpoint_r<r>.chk` files to resume from.
    pub resume_from: Option<PathBuf>,
    /// Checkpoint every this many `T_f` (at sample times); `None` disables.
    pub checkpoint_interval: Option<f64>,
    pub work_budget: u64,
    pub kinematic: KinematicConfig,
    pub audit: AuditConfig,
    pub truncated: TruncatedConfig,
    pub convergence: ConvergenceConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicConfig {
    pub lambda_list: Vec<f64>,
    pub tau: f64,
    /// `L1 = [−w, w]²`.
    pub l1_half_width: i64,
    pub search_box: i64,
    pub max_level: usize,
    pub norm: WindowNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Defaults to the simulation torus.
    pub omega_sq: Option<f64>,
    pub k_max: u64,
    pub mode: FractionMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedConfig {
    pub support_box: i64,
    pub lambda: f64,
    pub tau: f64,
    pub norm: WindowNorm,
    /// Use only exact resonances (`Λ → 0⁺`).
    pub exact_only: bool,
    pub sign: Sign,
    /// Random data lives on `|k|∞ ≤ data_radius`.
    pub data_radius: i64,
    /// `‖z(0)‖_{ℓ²}`.
    pub amplitude: f64,
    /// In units of `T_f`.
    pub dt: f64,
    /// In units of `T_f`.
    pub t_end: f64,
    pub sample_every: u64,
    /// `M` values whose `N_M` is recorded.
    pub cutoffs: Vec<i64>,
    pub record_lines: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceCase {
    /// Realization 0 of the simulation config, finest rung as reference.
    Field,
    /// One mode against its closed-form rotation.
    SingleMode,
    /// Linear flow only; errors must sit at roundoff.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub case: ConvergenceCase,
    /// In units of `T_f`, each half the previous.
    pub dt_ladder: Vec<f64>,
    /// In units of `T_f`.
    pub t_end: f64,
    pub order_range: [f64; 2],
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            simulation: SimulationConfig::default(),
            epsilon_list: vec![0.0125, 0.025, 0.05, 0.1],
            r_list: vec![1.8263, 2.5828, 3.6526],
            study_tori: vec![TorusSpec::square(), TorusSpec::sqrt2()],
            output_dir: None,
            formats: [Format::Csv, Format::Json, Format::Binary, Format::SvgPlotData].into(),
            resume_from: None,
            checkpoint_interval: None,
            work_budget: tori_core::resonance::DEFAULT_WORK_BUDGET as u64,
            kinematic: KinematicConfig {
                lambda_list: vec![10.0, 20.0, 30.0],
                tau: 0.1,
                l1_half_width: 2,
                search_box: DEFAULT_SEARCH_BOX,
                max_level: 6,
                norm: WindowNorm::Dispersion,
            },
            audit: AuditConfig {
                omega_sq: None,
                k_max: 512,
                mode: FractionMode::Decimal,
            },
            truncated: TruncatedConfig {
                support_box: 8,
                lambda: 30.0,
                tau: 0.1,
                norm: WindowNorm::Index,
                exact_only: false,
                sign: Sign::Defocusing,
                data_radius: 8,
                amplitude: 0.5,
                dt: 1.0 / 200.0,
                t_end: 10.0,
                sample_every: 10,
                cutoffs: vec![],
                record_lines: false,
            },
            convergence: ConvergenceConfig {
                case: ConvergenceCase::Field,
                dt_ladder: vec![1.0 / 500.0, 1.0 / 1000.0, 1.0 / 2000.0, 1.0 / 4000.0],
                t_end: 0.5,
                order_range: [3.5, 4.5],
            },
        }
    }
}

impl ExperimentConfig {
    /// Defaults ← `file` ← `overrides` (in order), then `experiment` and
    /// `out` from the command line.
    pub fn load(
        experiment: Experiment,
        file: Option<&Path>,
        overrides: &[String],
        out: Option<&Path>,
    ) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(Self::default()).expect("defaults serialize");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            let layer: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
            merge(&mut value, layer, "")?;
        }
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{item}`")))?;
            set_path(&mut value, key.trim(), parse_scalar(raw.trim()))?;
        }
        let mut config: Self = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
        match config.experiment {
            Some(e) if e != experiment => {
                return Err(CliError::Config(format!(
                    "configuration is for {e:?}, not {experiment:?}"
                )))
            }
            _ => config.experiment = Some(experiment),
        }
        if let Some(dir) = out {
            config.output_dir = Some(dir.to_owned());
        }
        if config.output_dir.is_none() {
            return Err(CliError::Config("no output directory (use --out)".into()));
        }
        Ok(config)
    }

    pub fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().expect("checked in load")
    }

    pub fn audit_omega_sq(&self) -> f64 {
        self.audit.omega_sq.unwrap_or(self.simulation.torus.omega_sq())
    }

    pub fn budget(&self) -> u128 {
        self.work_budget as u128
    }
}

/// JSON if it parses (numbers, booleans, arrays, objects, null), otherwise
/// the raw text as a string.
fn parse_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()))
}

fn merge(base: &mut Value, layer: Value, prefix: &str) -> Result<(), CliError> {
    let Value::Object(layer) = layer else {
        return Err(CliError::Config("configuration must be a JSON object".into()));
    };
    let base = base.as_object_mut().expect("object");
    for (key, v) in layer {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let Some(slot) = base.get_mut(&key) else {
            return Err(CliError::Config(format!("unknown configuration key `{path}`")));
        };
        if is_section(slot) && v.is_object() {
            merge(slot, v, &path)?;
        } else {
            *slot = v;
        }
    }
    Ok(())
}

/// Nested sections are objects in the defaults; plain values (even when an
/// object, like a torus) are replaced wholesale.
fn is_section(v: &Value) -> bool {
    v.as_object().is_some_and(|m: &Map<String, Value>| !m.contains_key("omega_sq"))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}` does not name a setting")))?;
        let slot = obj
            .get_mut(*part)
            .ok_or_else(|| CliError::Config(format!("unknown configuration key `{key}`")))?;
        if i + 1 == parts.len() {
            *slot = value;
            return Ok(());
        }
        node = slot;
    }
    unreachable!("split yields at least one part")
}
