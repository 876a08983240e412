use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use tori_core::diagnostics::{anisotropy_ratio, sobolev_norm, spectrum_dump, threshold_m, ThresholdResult};
use tori_core::io::svg_lines;
use tori_core::solver::{SimulationConfig, SpectralField};
use tori_core::{TorusKind, TorusSpec};

use crate::commands::simulate::{run_ensemble, write_realization};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Output;

#[derive(Serialize)]
struct Row {
    r: f64,
    torus: TorusSpec,
    epsilon_factor: f64,
    result: ThresholdResult,
}

#[derive(Serialize)]
struct Final {
    r: f64,
    torus: TorusSpec,
    realization: usize,
    sobolev: f64,
    mass: f64,
    anisotropy_ratio: Option<f64>,
}

fn tag(r: f64, torus: &TorusSpec) -> String {
    format!("R{r}_w{}_", torus.omega_sq())
}

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<Value, CliError> {
    if config.r_list.is_empty() || config.epsilon_list.is_empty() || config.study_tori.is_empty() {
        return Err(CliError::Config(
            "threshold study needs nonempty r_list, epsilon_list and study_tori".into(),
        ));
    }
    let base = &config.simulation;
    let s = base.sobolev_index()?;
    let points: Vec<(f64, TorusSpec)> = config
        .r_list
        .iter()
        .flat_map(|&r| config.study_tori.iter().map(move |&t| (r, t)))
        .collect();
    let finals: Vec<Vec<SpectralField>> = points
        .par_iter()
        .map(|&(r, torus)| {
            let sim = SimulationConfig { r, torus, ..base.clone() };
            let runs = run_ensemble(config, &sim, out, &tag(r, &torus))?;
            for run in &runs {
                write_realization(out, &sim, run, &tag(r, &torus))?;
            }
            Ok(runs.into_iter().map(|o| o.final_field).collect())
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows = Vec::new();
    let mut per_final = Vec::new();
    for (&(r, torus), fields) in points.iter().zip(&finals) {
        for &e in &config.epsilon_list {
            let ms = fields
                .iter()
                .map(|f| threshold_m(f, e * r, s).map(|t| t.radius))
                .collect::<Result<Vec<_>, _>>()?;
            let t_end = fields.first().map_or(0.0, |f| f.time);
            rows.push(Row {
                r,
                torus,
                epsilon_factor: e,
                result: ThresholdResult::new(ms, e * r, r, t_end, base.s)?,
            });
        }
        for (i, f) in fields.iter().enumerate() {
            per_final.push(Final {
                r,
                torus,
                realization: i,
                sobolev: sobolev_norm(f, s),
                mass: f.mass(),
                anisotropy_ratio: anisotropy_ratio(&spectrum_dump(f)).ok(),
            });
        }
    }

    out.csv("thresholds.csv", |w| {
        write!(w, "r,omega_sq,kind,epsilon_factor,epsilon,median_m,min_m,max_m")?;
        for i in 0..base.n_realizations {
            write!(w, ",m_r{i}")?;
        }
        writeln!(w)?;
        for row in &rows {
            let x = &row.result;
            write!(
                w,
                "{},{},{},{},{:e},{},{},{}",
                row.r,
                row.torus.omega_sq(),
                kind(&row.torus),
                row.epsilon_factor,
                x.epsilon,
                x.median_m,
                x.min_m,
                x.max_m
            )?;
            for m in &x.per_realization_m {
                write!(w, ",{m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    out.csv("finals.csv", |w| {
        writeln!(w, "r,omega_sq,kind,realization,sobolev,mass,anisotropy_ratio")?;
        for f in &per_final {
            let a = f.anisotropy_ratio.map_or(String::new(), |a| format!("{a:e}"));
            writeln!(
                w,
                "{},{},{},{},{:e},{:e},{a}",
                f.r,
                f.torus.omega_sq(),
                kind(&f.torus),
                f.realization,
                f.sobolev,
                f.mass
            )?;
        }
        Ok(())
    })?;
    out.json("thresholds.json", &rows)?;
    out.json("finals.json", &per_final)?;
    out.svg("thresholds.svg", || {
        let mut lines = Vec::new();
        for torus in &config.study_tori {
            for &e in &config.epsilon_list {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|x| x.torus == *torus && x.epsilon_factor == e)
                    .map(|x| (x.r, x.result.median_m))
                    .collect();
                lines.push((format!("ω²={} ε={e}R", torus.omega_sq()), pts));
            }
        }
        let refs: Vec<(&str, Vec<(f64, f64)>)> = lines.iter().map(|(l, p)| (l.as_str(), p.clone())).collect();
        svg_lines("median M vs R", &refs)
    })?;

    Ok(json!({
        "rows": rows.len(),
        "ordering": ordering(config, &rows),
    }))
}

fn kind(t: &TorusSpec) -> &'static str {
    match t.kind() {
        TorusKind::Rational => "rational",
        TorusKind::Irrational => "irrational",
    }
}

/// For each `(R, ε)`: whether the median M on every irrational torus is at
/// most the median on every rational one.
fn ordering(config: &ExperimentConfig, rows: &[Row]) -> Vec<Value> {
    let mut out = Vec::new();
    for &r in &config.r_list {
        for &e in &config.epsilon_list {
            let at = |rational: bool| -> Vec<f64> {
                rows.iter()
                    .filter(|x| x.r == r && x.epsilon_factor == e && x.torus.is_rational() == rational)
                    .map(|x| x.result.median_m)
                    .collect()
            };
            let (rat, irr) = (at(true), at(false));
            if rat.is_empty() || irr.is_empty() {
                continue;
            }
            let holds = irr.iter().all(|i| rat.iter().all(|q| i <= q));
            out.push(json!({ "r": r, "epsilon_factor": e, "irrational_le_rational": holds }));
        }
    }
    out
}
