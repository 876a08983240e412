//! Spectral ↔ physical transforms on the padded grid.
//!
//! Normalization: `ψ(x_j) = Σ_k ψ̂_k e^{i k·x_j}` and `ψ̂_k = N⁻² Σ_j ψ(x_j)
//! e^{−i k·x_j}`, so `Σ|ψ̂_k|²` equals the grid average of `|ψ|²`. The aspect
//! ratio only enters through `λ_k`; on the grid both directions are plain
//! index periods.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::solver::field::SpectralField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub struct Transform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `m`-major staging buffer; rows are `ℓ` transforms.
    rows: Vec<Complex64>,
    /// `ℓ`-major buffer holding physical values after `to_grid`.
    grid: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for i0 in (0..n).step_by(B) {
        for j0 in (0..n).step_by(B) {
            for i in i0..(i0 + B).min(n) {
                for j in j0..(j0 + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

fn wrap(n: usize, k: i64) -> usize {
    k.rem_euclid(n as i64) as usize
}

impl Transform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            rows: vec![ZERO; n * n],
            grid: vec![ZERO; n * n],
            scratch: vec![ZERO; scratch_len],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }


    /// Physical values of `coeffs` (box half-width `k_alias`) into the grid
    /// buffer. Only the `2K+1` occupied rows are transformed in `ℓ`.
    pub fn to_grid(&mut self, coeffs: &[Complex64], k_alias: i64) -> &[Complex64] {
        let n = self.n;
        let side = (2 * k_alias + 1) as usize;
        debug_assert_eq!(coeffs.len(), side * side);
        self.rows.fill(ZERO);
        for (a, m) in (-k_alias..=k_alias).enumerate() {
            let row = wrap(n, m) * n;
            for (b, l) in (-k_alias..=k_alias).enumerate() {
                self.rows[row + wrap(n, l)] = coeffs[a * side + b];
            }
            self.inverse
                .process_with_scratch(&mut self.rows[row..row + n], &mut self.scratch);
        }
        transpose(&self.rows, &mut self.grid, n);
        self.inverse.process_with_scratch(&mut self.grid, &mut self.scratch);
        &self.grid
    }

    pub fn grid(&self) -> &[Complex64] {
        &self.grid
    }

    pub fn grid_mut(&mut self) -> &mut [Complex64] {
        &mut self.grid
    }

    /// Coefficients of the grid buffer, truncated to the box of half-width
    /// `k_alias`, written into `out`. Consumes the grid buffer.
    pub fn from_grid(&mut self, k_alias: i64, out: &mut [Complex64]) {
        let n = self.n;
        let side = (2 * k_alias + 1) as usize;
        debug_assert_eq!(out.len(), side * side);
        self.forward.process_with_scratch(&mut self.grid, &mut self.scratch);
        transpose(&self.grid, &mut self.rows, n);
        let scale = 1.0 / (n * n) as f64;
        for (a, m) in (-k_alias..=k_alias).enumerate() {
            let row = wrap(n, m) * n;
            self.forward
                .process_with_scratch(&mut self.rows[row..row + n], &mut self.scratch);
            for (b, l) in (-k_alias..=k_alias).enumerate() {
                out[a * side + b] = self.rows[row + wrap(n, l)] * scale;
            }
        }
    }

    /// Grid values of a field.
    pub fn field_to_grid(&mut self, field: &SpectralField) -> &[Complex64] {
        self.to_grid(field.coeffs(), field.k_alias())
    }
}
