//! Pseudospectral integration of the full cubic equation.

mod checkpoint;
mod convergence;
mod field;
mod initial;
mod stepper;
mod transform;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC};
pub use convergence::{convergence_ladder, ConvergenceReport, ConvergenceRung};
pub use field::{min_grid, SpectralField};
pub use initial::{make_initial_condition, stencil_amplitude, stencil_modes, STENCIL};
pub use stepper::{nonlinear_term, Stepper};
pub use transform::Transform;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticRecord, DiagnosticSeries};
use crate::error::{Error, Result};
use crate::lattice::{SobolevIndex, TorusSpec};
use crate::FUNDAMENTAL_PERIOD;

/// One ensemble of runs. `dt`, `t_end`, `sample_interval` and
/// `snapshot_times` are in units of `T_f = 2π`; recorded times are absolute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub torus: TorusSpec,
    pub grid_n: usize,
    pub k_alias: i64,
    pub dt: f64,
    pub t_end: f64,
    pub s: f64,
    /// Initial `‖ψ̂‖_s`.
    pub r: f64,
    pub seed: u64,
    pub n_realizations: usize,
    pub sample_interval: f64,
    #[serde(default)]
    pub tail_radii: Vec<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            torus: TorusSpec::sqrt2(),
            grid_n: 128,
            k_alias: 32,
            dt: 1.0 / 2000.0,
            t_end: 20.0,
            s: 2.0,
            r: 1.8263,
            seed: 0,
            n_realizations: 5,
            sample_interval: 0.1,
            tail_radii: Vec::new(),
            snapshot_times: Vec::new(),
        }
    }
}

/// Whole number of steps of length `dt` in `span`, if it is one.
fn steps_in(span: f64, dt: f64, what: &str) -> Result<u64> {
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.abs().max(dt) {
        return Err(Error::InvalidParameter(format!(
            "{what} = {span} is not a multiple of dt = {dt}"
        )));
    }
    Ok(n as u64)
}

/// Step counts derived from a config.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub total_steps: u64,
    pub sample_every: u64,
    pub snapshot_steps: Vec<u64>,
}

impl SimulationConfig {
    pub fn sobolev_index(&self) -> Result<SobolevIndex> {
        SobolevIndex::new(self.s)
    }

    pub fn validate(&self) -> Result<Schedule> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.sample_interval < self.dt {
            return bad(format!(
                "sample_interval {} is shorter than dt {}",
                self.sample_interval, self.dt
            ));
        }
        if self.t_end > 0.0 && self.sample_interval > self.t_end {
            return bad(format!(
                "sample_interval {} exceeds t_end {}",
                self.sample_interval, self.t_end
            ));
        }
        if self.n_realizations == 0 {
            return bad("n_realizations must be >= 1".into());
        }
        if !(self.r > 0.0) {
            return bad(format!("R must be positive, got {}", self.r));
        }
        if self.tail_radii.iter().any(|m| !(*m >= 0.0)) {
            return bad("tail radii must be non-negative".into());
        }
        self.sobolev_index()?;
        SpectralField::zeros(self.torus, self.grid_n, self.k_alias)?;
        let mut snapshot_steps = self
            .snapshot_times
            .iter()
            .map(|&t| {
                if t < 0.0 || t > self.t_end {
                    return Err(Error::InvalidParameter(format!(
                        "snapshot time {t} is outside [0, {}]",
                        self.t_end
                    )));
                }
                steps_in(t, self.dt, "snapshot time")
            })
            .collect::<Result<Vec<_>>>()?;
        snapshot_steps.sort_unstable();
        snapshot_steps.dedup();
        Ok(Schedule {
            dt: self.dt * FUNDAMENTAL_PERIOD,
            total_steps: steps_in(self.t_end, self.dt, "t_end")?,
            sample_every: steps_in(self.sample_interval, self.dt, "sample_interval")?,
            snapshot_steps,
        })
    }

    pub fn initial_field(&self, realization: usize) -> Result<SpectralField> {
        make_initial_condition(
            self.r,
            self.sobolev_index()?,
            self.seed.wrapping_add(realization as u64),
            self.torus,
            self.grid_n,
            self.k_alias,
        )
    }
}

/// Series, requested snapshots and the final state of one realization.
#[derive(Clone, Debug)]
pub struct RealizationOutput {
    pub series: DiagnosticSeries,
    pub snapshots: Vec<SpectralField>,
    pub final_field: SpectralField,
}

pub type Observer<'a> = dyn FnMut(&SpectralField, &DiagnosticRecord) + 'a;

/// Integrates `field` from its current time (a whole number of steps) to
/// `t_end`, sampling on the global grid `t = j·sample_interval` so a resumed
/// run reproduces the tail of an unbroken one bit for bit.
pub fn integrate(
    config: &SimulationConfig,
    mut field: SpectralField,
    realization: usize,
    config_hash: &str,
    observer: &mut Observer<'_>,
) -> Result<RealizationOutput> {
    let schedule = config.validate()?;
    let s = config.sobolev_index()?;
    let start = (field.time / schedule.dt).round() as u64;
    if start > schedule.total_steps {
        return Err(Error::InvalidParameter(format!(
            "start time {} is past t_end",
            field.time
        )));
    }
    let mut stepper = Stepper::new(&field, schedule.dt)?;
    let mut transform = Transform::new(field.grid_n());
    let mut series = DiagnosticSeries {
        realization_id: realization,
        config_hash: config_hash.to_owned(),
        s: config.s,
        tail_radii: config.tail_radii.clone(),
        records: Vec::new(),
    };
    let mut snapshots = Vec::new();
    let mut visit = |field: &SpectralField, step: u64, series: &mut DiagnosticSeries| {
        if step % schedule.sample_every == 0 || step == schedule.total_steps {
            let rec = DiagnosticRecord::measure(&mut transform, field, s, &config.tail_radii);
            observer(field, &rec);
            series.records.push(rec);
        }
        if schedule.snapshot_steps.binary_search(&step).is_ok() {
            snapshots.push(field.clone());
        }
    };
    field.time = start as f64 * schedule.dt;
    visit(&field, start, &mut series);
    for step in start + 1..=schedule.total_steps {
        stepper.step(&mut field);
        field.time = step as f64 * schedule.dt;
        if !field.is_finite() {
            return Err(Error::NonFinite { time: field.time });
        }
        visit(&field, step, &mut series);
    }
    Ok(RealizationOutput {
        series,
        snapshots,
        final_field: field,
    })
}

/// Runs realization `r` from its seeded initial condition.
pub fn run_realization(
    config: &SimulationConfig,
    realization: usize,
    config_hash: &str,
    observer: &mut Observer<'_>,
) -> Result<RealizationOutput> {
    let field = config.initial_field(realization)?;
    integrate(config, field, realization, config_hash, observer)
}

/// All realizations, concurrently; the observer gets the realization index.
pub fn run_simulation<F>(
    config: &SimulationConfig,
    config_hash: &str,
    observer: F,
) -> Result<Vec<RealizationOutput>>
where
    F: Fn(usize, &SpectralField, &DiagnosticRecord) + Sync,
{
    config.validate()?;
    (0..config.n_realizations)
        .into_par_iter()
        .map(|r| run_realization(config, r, config_hash, &mut |f, rec| observer(r, f, rec)))
        .collect()
}
