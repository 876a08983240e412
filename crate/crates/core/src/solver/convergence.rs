//! Time-step ladders for the observed order of accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::field::SpectralField;
use crate::solver::stepper::Stepper;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRung {
    pub dt: f64,
    /// `‖u_dt(T) − u_ref(T)‖_{ℓ²}`.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub t_end: f64,
    pub rungs: Vec<ConvergenceRung>,
    /// `log₂(e(2dt)/e(dt))` for consecutive rungs above the roundoff floor.
    pub orders: Vec<f64>,
    /// Errors decrease down the ladder.
    pub monotone: bool,
    /// Every error is at roundoff level; no order can be measured.
    pub at_floor: bool,
    /// The reference is a closed form rather than the finest rung.
    pub closed_form_reference: bool,
}

impl ConvergenceReport {
    /// All measured orders lie in `[lo, hi]` (and at least one was measured).
    pub fn orders_within(&self, lo: f64, hi: f64) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|p| (lo..=hi).contains(p))
    }
}

/// Integrates `initial` to `t_end` at `t_end / dt` steps per rung.
pub fn evolve(initial: &SpectralField, t_end: f64, dt: f64, linear_only: bool) -> Result<SpectralField> {
    let n = (t_end / dt).round();
    if n < 1.0 || (n * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} is not a positive multiple of dt = {dt}"
        )));
    }
    let mut field = initial.clone();
    let mut stepper = Stepper::new(&field, dt)?;
    if linear_only {
        stepper = stepper.without_nonlinearity();
    }
    for _ in 0..n as u64 {
        stepper.step(&mut field);
    }
    if !field.is_finite() {
        return Err(Error::NonFinite { time: field.time });
    }
    Ok(field)
}

/// Runs the ladder `dts` (each half the previous). With `exact = None` the
/// finest rung serves as reference and is not itself reported.
pub fn convergence_ladder(
    initial: &SpectralField,
    t_end: f64,
    dts: &[f64],
    exact: Option<&SpectralField>,
    linear_only: bool,
) -> Result<ConvergenceReport> {
    if dts.len() < 3 {
        return Err(Error::InvalidParameter("a ladder needs at least 3 time steps".into()));
    }
    for w in dts.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "time steps must halve: {} -> {}",
                w[0], w[1]
            )));
        }
    }
    let finals = dts
        .iter()
        .map(|&dt| evolve(initial, t_end, dt, linear_only))
        .collect::<Result<Vec<_>>>()?;
    let (reference, measured) = match exact {
        Some(e) => (e, &finals[..]),
        None => (finals.last().expect("nonempty"), &finals[..finals.len() - 1]),
    };
    let rungs: Vec<ConvergenceRung> = measured
        .iter()
        .zip(dts)
        .map(|(f, &dt)| ConvergenceRung {
            dt,
            error: f.distance(reference),
        })
        .collect();
    let floor = 1e3 * f64::EPSILON * reference.mass().sqrt().max(f64::MIN_POSITIVE);
    let orders = rungs
        .windows(2)
        .filter(|w| w[1].error > floor)
        .map(|w| (w[0].error / w[1].error).log2())
        .collect();
    Ok(ConvergenceReport {
        t_end,
        monotone: rungs.windows(2).all(|w| w[1].error <= w[0].error),
        at_floor: rungs.iter().all(|r| r.error <= floor),
        closed_form_reference: exact.is_some(),
        orders,
        rungs,
    })
}
