use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{ModeIndex, TorusSpec};

/// Fourier coefficients `ψ̂_k` on the box `|m|, |ℓ| ≤ K`, stored row-major
/// with `m` as the outer index.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
    k_alias: i64,
    grid_n: usize,
    torus: TorusSpec,
    pub time: f64,
}

/// Smallest physical grid for a cubic nonlinearity on a box of half-width `k`.
pub fn min_grid(k_alias: i64) -> usize {
    (2 * (2 * k_alias + 1) - 2) as usize
}

impl SpectralField {
    pub fn zeros(torus: TorusSpec, grid_n: usize, k_alias: i64) -> Result<Self> {
        if k_alias < 1 {
            return Err(Error::InvalidParameter(format!(
                "K_alias must be >= 1, got {k_alias}"
            )));
        }
        if grid_n < min_grid(k_alias) {
            return Err(Error::InvalidParameter(format!(
                "grid_n = {grid_n} is below {} required for K_alias = {k_alias}",
                min_grid(k_alias)
            )));
        }
        let side = (2 * k_alias + 1) as usize;
        Ok(Self {
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
            k_alias,
            grid_n,
            torus,
            time: 0.0,
        })
    }

    /// Wraps existing row-major coefficients.
    pub fn from_coeffs(
        torus: TorusSpec,
        grid_n: usize,
        k_alias: i64,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        let mut field = Self::zeros(torus, grid_n, k_alias)?;
        if coeffs.len() != field.coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                field.coeffs.len(),
                coeffs.len()
            )));
        }
        field.coeffs = coeffs;
        Ok(field)
    }

    pub fn k_alias(&self) -> i64 {
        self.k_alias
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    /// Points per side of the mode box, `2K + 1`.
    pub fn side(&self) -> usize {
        (2 * self.k_alias + 1) as usize
    }

    pub fn index(&self, k: ModeIndex) -> Option<usize> {
        if k.inf_norm() > self.k_alias {
            return None;
        }
        let side = self.side() as i64;
        Some(((k.m + self.k_alias) * side + k.l + self.k_alias) as usize)
    }

    pub fn mode_at(&self, index: usize) -> ModeIndex {
        let side = self.side();
        ModeIndex::new(
            (index / side) as i64 - self.k_alias,
            (index % side) as i64 - self.k_alias,
        )
    }

    /// Coefficient of `k`, zero outside the box.
    pub fn get(&self, k: ModeIndex) -> Complex64 {
        self.index(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set(&mut self, k: ModeIndex, value: Complex64) -> Result<()> {
        let i = self.index(k).ok_or_else(|| {
            Error::InvalidParameter(format!("mode {k} is outside |k|∞ <= {}", self.k_alias))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `(k, ψ̂_k)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        ModeIndex::square(self.k_alias).zip(self.coeffs.iter().copied())
    }

    /// `‖ψ̂‖²_{ℓ²}`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Same field with every coefficient multiplied by `e^{iφ}`.
    pub fn rotated(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= r);
        out
    }

    /// `ψ̂_k ↦ ψ̂_{−k}`.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.reverse();
        out
    }

    /// `ψ̂_{(m,ℓ)} ↦ ψ̂_{(ℓ,m)}`.
    pub fn transposed(&self) -> Self {
        let side = self.side();
        let mut out = self.clone();
        for i in 0..side {
            for j in 0..side {
                out.coeffs[j * side + i] = self.coeffs[i * side + j];
            }
        }
        out
    }

    /// `‖a − b‖_{ℓ²}` against a field on the same box.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "mode boxes differ");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}
