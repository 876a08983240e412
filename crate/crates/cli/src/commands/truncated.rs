use std::io::Write;

use serde_json::{json, Value};
use tori_core::io::svg_lines;
use tori_core::resonance::QuasiResonanceParams;
use tori_core::truncated::{run_truncated, QuartetTable, TruncatedRun, TruncatedState};
use tori_core::{SobolevIndex, FUNDAMENTAL_PERIOD as TF};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Output;

/// Larger tables are summarized but not dumped.
const MAX_TABLE_DUMP: usize = 1_000_000;

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<Value, CliError> {
    let t = &config.truncated;
    let torus = config.simulation.torus;
    let table = if t.exact_only {
        QuartetTable::exact_only(t.support_box, &torus, config.budget())?
    } else {
        let params = QuasiResonanceParams::new(t.lambda, t.tau)?.with_norm(t.norm);
        QuartetTable::build(t.support_box, &params, &torus, config.budget())?
    };
    let extent = table.nonexact_extent();
    eprintln!("quartet table: {} ordered triples, non-exact extent {extent}", table.len());
    let state = TruncatedState::random(t.support_box, t.data_radius, t.amplitude, config.simulation.seed, t.sign)?;
    let run = TruncatedRun {
        t_end: t.t_end * TF,
        dt: t.dt * TF,
        sample_every: t.sample_every,
        cutoffs: t.cutoffs.clone(),
        s: SobolevIndex::new(config.simulation.s)?,
        record_lines: t.record_lines,
    };
    let (series, end) = run_truncated(state, &table, &run)?;
    let first = &series.records[0];
    let mass_drift = series.max_drift(|r| r.mass, first.mass);
    let cutoffs: Vec<Value> = t
        .cutoffs
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            json!({
                "cutoff": m,
                "initial": first.n_m[i],
                "relative_drift": series.max_drift(|r| r.n_m[i], first.n_m[i].max(first.mass)),
                // Conservation is only guaranteed above the quartet extent and the data.
                "conservation_expected": m > extent && m > t.data_radius,
            })
        })
        .collect();
    let lines = t.record_lines.then(|| {
        // Relative to each line's own mass; empty lines against the total.
        let scale = |x: f64| if x > 0.0 { x } else { first.mass };
        let mut worst: f64 = 0.0;
        for j in 0..series.lines.len() {
            worst = worst.max(series.max_drift(|r| r.rows[j], scale(first.rows[j])));
            worst = worst.max(series.max_drift(|r| r.columns[j], scale(first.columns[j])));
        }
        worst
    });

    out.csv("truncated_series.csv", |w| series.write_csv(w))?;
    out.json("truncated_series.json", &series)?;
    if table.len() <= MAX_TABLE_DUMP {
        out.csv("quartet_table.csv", |w| {
            writeln!(w, "m,l,m1,l1,m2,l2,m3,l3,theta,exact")?;
            for e in &table.entries {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{:e},{}",
                    e.k.m, e.k.l, e.k1.m, e.k1.l, e.k2.m, e.k2.l, e.k3.m, e.k3.l, e.theta, e.exact
                )?;
            }
            Ok(())
        })?;
    }
    out.svg("truncated.svg", || {
        let mut lines = vec![(
            "mass/mass(0)".to_string(),
            series.records.iter().map(|r| (r.t / TF, r.mass / first.mass)).collect::<Vec<_>>(),
        )];
        for (i, m) in t.cutoffs.iter().enumerate() {
            let scale = first.n_m[i].max(first.mass);
            lines.push((format!("N_{m}/scale"), series.records.iter().map(|r| (r.t / TF, r.n_m[i] / scale)).collect()));
        }
        let refs: Vec<(&str, Vec<(f64, f64)>)> = lines.iter().map(|(l, p)| (l.as_str(), p.clone())).collect();
        svg_lines("truncated system invariants vs t/T_f", &refs)
    })?;

    let report = json!({
        "table_entries": table.len(),
        "table_dumped": table.len() <= MAX_TABLE_DUMP,
        "nonexact_extent": extent,
        "exact_only": t.exact_only,
        "final_time": end.time,
        "relative_mass_drift": mass_drift,
        "cutoffs": cutoffs,
        "worst_line_drift": lines,
    });
    out.report("truncated.json", &report)?;
    Ok(report)
}
