use std::sync::Mutex;

use rayon::prelude::*;
use serde_json::{json, Value};
use tori_core::diagnostics::{anisotropy_ratio, sobolev_norm, spectrum_dump, Spectrum};
use tori_core::io::{svg_heatmap, svg_lines};
use tori_core::solver::{integrate, read_checkpoint, Checkpoint, RealizationOutput, SimulationConfig, SpectralField};
use tori_core::FUNDAMENTAL_PERIOD as TF;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{hash, Output};

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<Value, CliError> {
    let sim = &config.simulation;
    let runs = run_ensemble(config, sim, out, "")?;
    let mut realizations = Vec::new();
    for run in &runs {
        write_realization(out, sim, run, "")?;
        let s = sim.sobolev_index()?;
        realizations.push(json!({
            "realization": run.series.realization_id,
            "records": run.series.records.len(),
            "final_time": run.final_field.time,
            "final_sobolev": sobolev_norm(&run.final_field, s),
            "relative_mass_drift": run.series.relative_drift(|r| r.mass),
            "relative_hamiltonian_drift": run.series.relative_drift(|r| r.hamiltonian),
            "anisotropy_ratio": anisotropy_ratio(&spectrum_dump(&run.final_field)).ok(),
        }));
    }
    out.svg("sobolev.svg", || {
        let lines: Vec<(String, Vec<(f64, f64)>)> = runs
            .iter()
            .map(|r| {
                let pts = r.series.records.iter().map(|x| (x.t / TF, x.sobolev)).collect();
                (format!("r{}", r.series.realization_id), pts)
            })
            .collect();
        let refs: Vec<(&str, Vec<(f64, f64)>)> = lines.iter().map(|(l, p)| (l.as_str(), p.clone())).collect();
        svg_lines(&format!("H^{} norm vs t/T_f", sim.s), &refs)
    })?;
    if let Some(first) = runs.first() {
        out.svg("spectrum_r0_final.svg", || heatmap(&spectrum_dump(&first.final_field), "final spectrum, realization 0"))?;
    }
    Ok(json!({ "realizations": realizations }))
}

/// Runs every realization of `sim` in parallel, resuming from checkpoints
/// and writing periodic ones if configured. `tag` prefixes checkpoint names.
pub fn run_ensemble(
    config: &ExperimentConfig,
    sim: &SimulationConfig,
    out: &Output,
    tag: &str,
) -> Result<Vec<RealizationOutput>, CliError> {
    let schedule = sim.validate()?;
    let config_hash = hash(config)?;
    let every = match config.checkpoint_interval {
        None => None,
        Some(x) => {
            let n = (x / sim.dt).round();
            if !(n >= 1.0) || (n * sim.dt - x).abs() > 1e-9 * x || n as u64 % schedule.sample_every != 0 {
                return Err(CliError::Config(format!(
                    "checkpoint_interval {x} must be a positive multiple of sample_interval {}",
                    sim.sample_interval
                )));
            }
            Some(n as u64)
        }
    };
    let failure: Mutex<Option<CliError>> = Mutex::new(None);
    let runs = (0..sim.n_realizations)
        .into_par_iter()
        .map(|r| {
            let field = match &config.resume_from {
                None => sim.initial_field(r)?,
                Some(dir) => {
                    let chk = read_checkpoint(&dir.join(format!("{tag}checkpoint_r{r}.chk")))?;
                    compatible(sim, r, &chk)?;
                    chk.field
                }
            };
            let mut observer = |f: &SpectralField, _: &_| {
                let Some(every) = every else { return };
                let step = (f.time / schedule.dt).round() as u64;
                if step == 0 || step % every != 0 {
                    return;
                }
                let chk = Checkpoint {
                    field: f.clone(),
                    s: sim.s,
                    seed: sim.seed.wrapping_add(r as u64),
                };
                let meta = json!({ "realization": r, "t": f.time, "config_hash": config_hash });
                if let Err(e) = out.checkpoint(&format!("{tag}checkpoint_r{r}.chk"), &chk, &meta) {
                    failure.lock().expect("not poisoned").get_or_insert(e);
                }
            };
            let run = integrate(sim, field, r, &config_hash, &mut observer)?;
            eprintln!(
                "{tag}realization {r}: t = {:.3} T_f, ‖ψ‖_{} = {:.6}",
                run.final_field.time / TF,
                sim.s,
                run.series.last().map_or(f64::NAN, |x| x.sobolev)
            );
            Ok(run)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if let Some(e) = failure.into_inner().expect("not poisoned") {
        return Err(e);
    }
    Ok(runs)
}

fn compatible(sim: &SimulationConfig, r: usize, chk: &Checkpoint) -> Result<(), CliError> {
    let f = &chk.field;
    let same = f.grid_n() == sim.grid_n
        && f.k_alias() == sim.k_alias
        && *f.torus() == sim.torus
        && chk.s == sim.s
        && chk.seed == sim.seed.wrapping_add(r as u64);
    if same {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "checkpoint for realization {r} does not match the configuration"
        )))
    }
}

/// Series, snapshot spectra, final spectrum and final checkpoint of one run.
pub fn write_realization(
    out: &Output,
    sim: &SimulationConfig,
    run: &RealizationOutput,
    tag: &str,
) -> Result<(), CliError> {
    let r = run.series.realization_id;
    out.csv(&format!("{tag}series_r{r}.csv"), |w| run.series.write_csv(w))?;
    out.json(&format!("{tag}series_r{r}.json"), &run.series)?;
    for snap in &run.snapshots {
        let name = format!("{tag}spectrum_r{r}_t{}.csv", tf_label(snap.time));
        out.csv(&name, |w| spectrum_dump(snap).write_csv(w))?;
    }
    out.csv(&format!("{tag}spectrum_r{r}_final.csv"), |w| {
        spectrum_dump(&run.final_field).write_csv(w)
    })?;
    let chk = Checkpoint {
        field: run.final_field.clone(),
        s: sim.s,
        seed: sim.seed.wrapping_add(r as u64),
    };
    let meta = json!({ "realization": r, "t": run.final_field.time, "config_hash": run.series.config_hash });
    out.checkpoint(&format!("{tag}final_r{r}.chk"), &chk, &meta)
}

/// Time in units of `T_f` for file names, e.g. `2.5000`.
pub fn tf_label(t: f64) -> String {
    format!("{:.4}", t / TF)
}

pub fn heatmap(spec: &Spectrum, title: &str) -> String {
    let side = (2 * spec.k_alias + 1) as usize;
    svg_heatmap(title, side, &spec.energy, true)
}
