//! Scalar and spectral observables of a field.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dispersion, sobolev_weight, ModeIndex, SobolevIndex};
use crate::solver::{SpectralField, Transform};

/// `‖ψ̂‖_s = (Σ ⟨k⟩^{2s} |ψ̂_k|²)^{1/2}` over the box.
pub fn sobolev_norm(field: &SpectralField, s: SobolevIndex) -> f64 {
    field
        .iter()
        .map(|(k, c)| sobolev_weight(k, s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖ψ̂‖_s` restricted to `|k| > radius` (Euclidean, strict).
pub fn tail_norm(field: &SpectralField, radius: f64, s: SobolevIndex) -> f64 {
    field
        .iter()
        .filter(|(k, _)| k.norm() > radius)
        .map(|(k, c)| sobolev_weight(k, s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub radius: f64,
    /// `ε` exceeded the total norm, so the radius is trivially 0.
    pub epsilon_exceeds_norm: bool,
}

/// Smallest attained radius `M ∈ {0} ∪ {|k| : ψ̂_k ≠ 0}` with
/// `tail_norm(field, M, s) ≤ ε`.
pub fn threshold_m(field: &SpectralField, epsilon: f64, s: SobolevIndex) -> Result<Threshold> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    // Shells (|k|², weighted energy) by increasing radius.
    let mut shells: Vec<(i64, f64)> = Vec::new();
    let mut modes: Vec<(i64, f64)> = field
        .iter()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(k, c)| (k.norm_sq(), sobolev_weight(k, s) * c.norm_sqr()))
        .collect();
    modes.sort_by_key(|m| m.0);
    for (r2, e) in modes {
        match shells.last_mut() {
            Some(last) if last.0 == r2 => last.1 += e,
            _ => shells.push((r2, e)),
        }
    }
    // tails[j] = energy strictly outside shell j, summed from the outside in.
    let mut tails = vec![0.0; shells.len()];
    for j in (0..shells.len().saturating_sub(1)).rev() {
        tails[j] = tails[j + 1] + shells[j + 1].1;
    }
    let total = shells.iter().rev().map(|x| x.1).sum::<f64>();
    if epsilon > total.sqrt() {
        return Ok(Threshold {
            radius: 0.0,
            epsilon_exceeds_norm: true,
        });
    }
    let outside_zero = shells.iter().filter(|x| x.0 > 0).rev().map(|x| x.1).sum::<f64>();
    let radius = if outside_zero.sqrt() <= epsilon {
        0.0
    } else {
        let j = (0..shells.len())
            .find(|&j| tails[j].sqrt() <= epsilon)
            .expect("outermost shell has an empty tail");
        (shells[j].0 as f64).sqrt()
    };
    Ok(Threshold {
        radius,
        epsilon_exceeds_norm: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    /// `½ Σ λ_k |ψ̂_k|²`.
    pub h0: f64,
    /// `¼ Σ_{k₁+k₂=k₃+k₄} ψ̂₁ψ̂₂ψ̂̄₃ψ̂̄₄ = ¼ ⟨|ψ|⁴⟩`.
    pub p: f64,
}

impl Hamiltonian {
    pub fn total(&self) -> f64 {
        self.h0 + self.p
    }
}

pub fn hamiltonian(field: &SpectralField) -> Hamiltonian {
    hamiltonian_with(&mut Transform::new(field.grid_n()), field)
}

/// As [`hamiltonian`], reusing a transform of the field's grid size.
pub fn hamiltonian_with(t: &mut Transform, field: &SpectralField) -> Hamiltonian {
    let h0 = 0.5
        * field
            .iter()
            .map(|(k, c)| dispersion(k, field.torus()) * c.norm_sqr())
            .sum::<f64>();
    let grid = t.field_to_grid(field);
    let quartic = grid.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>();
    let p = 0.25 * quartic / grid.len() as f64;
    Hamiltonian { h0, p }
}

/// `|ψ̂_k|²` on the box, row-major with `m` outer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub k_alias: i64,
    pub energy: Vec<f64>,
}

impl Spectrum {
    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        ModeIndex::square(self.k_alias).zip(self.energy.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// Rows `m,l,energy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,l,energy")?;
        for (k, e) in self.modes() {
            writeln!(out, "{},{},{:e}", k.m, k.l, e)?;
        }
        Ok(())
    }
}

pub fn spectrum_dump(field: &SpectralField) -> Spectrum {
    Spectrum {
        k_alias: field.k_alias(),
        energy: field.coeffs().iter().map(|c| c.norm_sqr()).collect(),
    }
}

/// `Σ m²|ψ̂|² / Σ ℓ²|ψ̂|²`; `+∞` when only the `ℓ = 0` axis carries energy.
pub fn anisotropy_ratio(spectrum: &Spectrum) -> Result<f64> {
    let (num, den) = spectrum.modes().fold((0.0, 0.0), |(a, b), (k, e)| {
        (a + (k.m * k.m) as f64 * e, b + (k.l * k.l) as f64 * e)
    });
    if num == 0.0 && den == 0.0 {
        return Err(Error::Precondition(
            "anisotropy is undefined without energy off the zero mode".into(),
        ));
    }
    Ok(if den == 0.0 { f64::INFINITY } else { num / den })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Median (lower-middle for even counts), min and max.
pub fn ensemble_stats(values: &[f64]) -> Result<EnsembleStats> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("ensemble is empty".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(EnsembleStats {
        median: v[(v.len() - 1) / 2],
        min: v[0],
        max: v[v.len() - 1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `‖ψ̂‖²_{ℓ²}`.
    pub mass: f64,
    pub hamiltonian: f64,
    pub sobolev: f64,
    pub tails: Vec<f64>,
}

impl DiagnosticRecord {
    pub fn measure(
        t: &mut Transform,
        field: &SpectralField,
        s: SobolevIndex,
        tail_radii: &[f64],
    ) -> Self {
        Self {
            t: field.time,
            mass: field.mass(),
            hamiltonian: hamiltonian_with(t, field).total(),
            sobolev: sobolev_norm(field, s),
            tails: tail_radii.iter().map(|&m| tail_norm(field, m, s)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub realization_id: usize,
    pub config_hash: String,
    pub s: f64,
    pub tail_radii: Vec<f64>,
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticSeries {
    pub fn first(&self) -> Option<&DiagnosticRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&DiagnosticRecord> {
        self.records.last()
    }

    /// `max_t |q(t) − q(0)| / |q(0)|` for a recorded quantity.
    pub fn relative_drift(&self, q: impl Fn(&DiagnosticRecord) -> f64) -> f64 {
        let Some(first) = self.first() else { return 0.0 };
        let q0 = q(first);
        self.records
            .iter()
            .map(|r| (q(r) - q0).abs())
            .fold(0.0, f64::max)
            / q0.abs()
    }

    /// Columns `t,mass,hamiltonian,sobolev_<s>,tail_<M>...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t,mass,hamiltonian,sobolev_{}", self.s)?;
        for m in &self.tail_radii {
            write!(out, ",tail_{m}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{:e},{:e},{:e},{:e}", r.t, r.mass, r.hamiltonian, r.sobolev)?;
            for x in &r.tails {
                write!(out, ",{x:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub per_realization_m: Vec<f64>,
    pub median_m: f64,
    pub min_m: f64,
    pub max_m: f64,
    pub epsilon: f64,
    pub r: f64,
    pub t: f64,
    pub s: f64,
}

impl ThresholdResult {
    pub fn new(per_realization_m: Vec<f64>, epsilon: f64, r: f64, t: f64, s: f64) -> Result<Self> {
        let stats = ensemble_stats(&per_realization_m)?;
        Ok(Self {
            per_realization_m,
            median_m: stats.median,
            min_m: stats.min,
            max_m: stats.max,
            epsilon,
            r,
            t,
            s,
        })
    }
}
