//! Exhaustive enumeration of quasi-resonant quartets on a square mode box.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{ModeIndex, TorusSpec};
use crate::resonance::quartet::{
    defect, defect_in_window, is_defect_exact, DefectPair, QuasiResonanceParams, Quartet,
    WindowNorm,
};

/// Default cap on elementary quartet evaluations for one search.
pub const DEFAULT_WORK_BUDGET: u128 = 20_000_000_000;

/// Quasi-resonance test; for the index norm the window `Λ S^{−(1+τ)}` is
/// tabulated by the integer `S`.
#[derive(Clone, Debug)]
pub struct QuasiWindow {
    params: QuasiResonanceParams,
    torus: TorusSpec,
    bounds: Vec<f64>,
}

impl QuasiWindow {
    /// Tabulates the window for `S ≤ max_norm_sq_sum`; larger sums fall back
    /// to direct evaluation.
    pub fn new(params: QuasiResonanceParams, torus: TorusSpec, max_norm_sq_sum: usize) -> Self {
        let bounds = (0..=max_norm_sq_sum.min(1 << 20))
            .map(|s| params.bound(s as f64))
            .collect();
        Self {
            params,
            torus,
            bounds,
        }
    }

    pub fn params(&self) -> &QuasiResonanceParams {
        &self.params
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    fn bound(&self, q: &Quartet) -> f64 {
        match self.params.norm {
            WindowNorm::Index => {
                let s = q.norm_sq_sum();
                self.bounds
                    .get(s as usize)
                    .copied()
                    .unwrap_or_else(|| self.params.bound(s as f64))
            }
            WindowNorm::Dispersion => self.params.bound(self.params.window_sum(q, &self.torus)),
        }
    }

    pub fn admits_defect(&self, d: &DefectPair, q: &Quartet) -> bool {
        if is_defect_exact(d, &self.torus) {
            return true;
        }
        d.value(&self.torus).abs() <= self.bound(q)
    }

    pub fn admits(&self, q: &Quartet) -> Result<bool> {
        let d = defect(q)?;
        debug_assert_eq!(
            self.admits_defect(&d, q),
            defect_in_window(&d, self.params.window_sum(q, &self.torus), &self.params, &self.torus)
        );
        Ok(self.admits_defect(&d, q))
    }
}

pub(crate) fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        return Err(Error::WorkBudgetExceeded { required, budget });
    }
    Ok(())
}

fn box_modes(half_width: i64) -> Vec<ModeIndex> {
    ModeIndex::square(half_width).collect()
}

fn in_box(k: ModeIndex, half_width: i64) -> bool {
    k.inf_norm() <= half_width
}

/// Canonical quartets (each of `{k1,k2}` and `{k3,k4}` sorted) with all four
/// modes in `|k|∞ ≤ half_width` that pass `filter`, in lexicographic order.
fn enumerate_filtered<F>(half_width: i64, budget: u128, filter: F) -> Result<Vec<Quartet>>
where
    F: Fn(&Quartet) -> Result<bool> + Sync,
{
    if half_width < 1 {
        return Err(Error::InvalidParameter(format!(
            "mode box half-width must be >= 1, got {half_width}"
        )));
    }
    let modes = box_modes(half_width);
    let n = modes.len() as u128;
    check_budget(n * (n + 1) / 2 * n / 2, budget)?;
    let per_first: Vec<Result<Vec<Quartet>>> = (0..modes.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let k1 = modes[i];
            for &k2 in &modes[i..] {
                let total = k1 + k2;
                for &k3 in &modes {
                    let k4 = total - k3;
                    if k3 > k4 || !in_box(k4, half_width) {
                        continue;
                    }
                    let q = Quartet::completing(k1, k2, k3);
                    if filter(&q)? {
                        out.push(q);
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for chunk in per_first {
        all.extend(chunk?);
    }
    Ok(all)
}

/// Every quasi-resonant quartet inside the box, deduplicated under
/// `k1 ↔ k2` and `k3 ↔ k4`, sorted lexicographically.
pub fn enumerate_quasi_resonant_quartets(
    half_width: i64,
    params: &QuasiResonanceParams,
    torus: &TorusSpec,
    budget: u128,
) -> Result<Vec<Quartet>> {
    let window = QuasiWindow::new(*params, *torus, (16 * half_width * half_width) as usize);
    enumerate_filtered(half_width, budget, |q| window.admits(q))
}

/// Exactly resonant quartets inside the box (the `Λ → 0⁺` limit).
pub fn enumerate_exact_resonant_quartets(
    half_width: i64,
    torus: &TorusSpec,
    budget: u128,
) -> Result<Vec<Quartet>> {
    enumerate_filtered(half_width, budget, |q| {
        Ok(is_defect_exact(&defect(q)?, torus))
    })
}

/// Largest `|k_i|∞` over quasi-resonant quartets in the search box that are
/// not exactly resonant; `0` if there are none.
///
/// Requires `τ > 1`, where the extent is known to be finite independent of
/// the box.
pub fn max_quasi_resonant_extent(
    params: &QuasiResonanceParams,
    torus: &TorusSpec,
    search_box: i64,
    budget: u128,
) -> Result<i64> {
    if !(params.tau > 1.0) {
        return Err(Error::Precondition(format!(
            "quasi-resonant extent is only bounded for τ > 1, got τ={}",
            params.tau
        )));
    }
    let found = nonresonant_quasi_quartets(search_box, params, torus, budget)?;
    Ok(found.iter().map(Quartet::inf_extent).max().unwrap_or(0))
}

/// Quasi-resonant quartets in the box that are not exact resonances.
pub fn nonresonant_quasi_quartets(
    half_width: i64,
    params: &QuasiResonanceParams,
    torus: &TorusSpec,
    budget: u128,
) -> Result<Vec<Quartet>> {
    let window = QuasiWindow::new(*params, *torus, (16 * half_width * half_width) as usize);
    enumerate_filtered(half_width, budget, |q| {
        let d = defect(q)?;
        Ok(!is_defect_exact(&d, torus) && window.admits_defect(&d, q))
    })
}
