use std::io::Write;

use num_complex::Complex64;
use serde_json::{json, Value};
use tori_core::io::svg_lines;
use tori_core::solver::{convergence_ladder, SpectralField};
use tori_core::{ModeIndex, FUNDAMENTAL_PERIOD as TF};

use crate::config::{ConvergenceCase, ExperimentConfig};
use crate::error::CliError;
use crate::output::Output;

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<Value, CliError> {
    let c = &config.convergence;
    let sim = &config.simulation;
    let t_end = c.t_end * TF;
    let dts: Vec<f64> = c.dt_ladder.iter().map(|d| d * TF).collect();
    let (initial, exact) = match c.case {
        ConvergenceCase::Field | ConvergenceCase::Linear => (sim.initial_field(0)?, None),
        ConvergenceCase::SingleMode => {
            let mut f = SpectralField::zeros(sim.torus, sim.grid_n, sim.k_alias)?;
            let k = ModeIndex::new(1, 1);
            let a = Complex64::new(0.8, 0.6);
            f.set(k, a)?;
            // |ψ|²ψ on a single mode is |a|²a, so the mode just rotates.
            let rate = 1.0 + sim.torus.omega_sq() + a.norm_sqr();
            let mut e = f.clone();
            e.set(k, a * Complex64::from_polar(1.0, rate * t_end))?;
            (f, Some(e))
        }
    };
    let linear = c.case == ConvergenceCase::Linear;
    let report = convergence_ladder(&initial, t_end, &dts, exact.as_ref(), linear)?;
    let [lo, hi] = c.order_range;
    let passes = if linear {
        report.at_floor
    } else {
        report.monotone && report.orders_within(lo, hi)
    };
    for (rung, p) in report.rungs.iter().zip(std::iter::once(None).chain(report.orders.iter().map(Some))) {
        eprintln!(
            "dt = T_f/{:.0}: error {:.3e}{}",
            TF / rung.dt,
            rung.error,
            p.map_or(String::new(), |p| format!(", order {p:.3}"))
        );
    }

    out.csv("convergence.csv", |w| {
        writeln!(w, "dt,error")?;
        for r in &report.rungs {
            writeln!(w, "{:e},{:e}", r.dt, r.error)?;
        }
        Ok(())
    })?;
    out.svg("convergence.svg", || {
        let pts = report.rungs.iter().map(|r| (r.dt.log10(), r.error.max(1e-300).log10())).collect();
        svg_lines("log10 error vs log10 dt", &[("error", pts)])
    })?;
    let summary = json!({
        "case": c.case,
        "report": report,
        "order_range": c.order_range,
        "passes": passes,
    });
    out.report("convergence.json", &summary)?;
    if !passes {
        out.manifest(config, summary.clone())?;
        let why = if !report.monotone {
            "error ladder is not monotone".to_string()
        } else if linear {
            "linear flow errors are above roundoff".to_string()
        } else {
            format!("observed orders {:?} outside [{lo}, {hi}]", report.orders)
        };
        return Err(CliError::Numerical(why));
    }
    Ok(summary)
}
