use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{sobolev_weight, ModeIndex, SobolevIndex, TorusSpec};
use crate::solver::field::SpectralField;

/// Half-width of the excited stencil.
pub const STENCIL: i64 = 2;

/// The 24 modes `0 < |k|∞ ≤ 2` in draw order (row-major, `m` outer).
pub fn stencil_modes() -> impl Iterator<Item = ModeIndex> {
    ModeIndex::square(STENCIL).filter(|&k| k != ModeIndex::ZERO)
}

/// Amplitude `C` giving `‖ψ̂‖_s = r` on the stencil.
pub fn stencil_amplitude(r: f64, s: SobolevIndex) -> f64 {
    let total: f64 = stencil_modes().map(|k| sobolev_weight(k, s)).sum();
    r / total.sqrt()
}

/// `ψ̂_k = C e^{iφ_k}` on the stencil, phases uniform on `[0, 2π)` from
/// ChaCha8 seeded with `seed`, everything else zero.
pub fn make_initial_condition(
    r: f64,
    s: SobolevIndex,
    seed: u64,
    torus: TorusSpec,
    grid_n: usize,
    k_alias: i64,
) -> Result<SpectralField> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("R must be positive, got {r}")));
    }
    if k_alias < STENCIL {
        return Err(Error::InvalidParameter(format!(
            "K_alias = {k_alias} cannot hold the |k|∞ <= {STENCIL} stencil"
        )));
    }
    let mut field = SpectralField::zeros(torus, grid_n, k_alias)?;
    let c = stencil_amplitude(r, s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in stencil_modes() {
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        field.set(k, Complex64::from_polar(c, phi))?;
    }
    Ok(field)
}
