//! Integrating-factor RK4 for `ψ̂'_k = iλ_k ψ̂_k + i (|ψ|²ψ)^_k`.
//!
//! This is the mode form of `i∂_tψ = Δψ − |ψ|²ψ` with the convention
//! `iψ̂'_k = −λ_kψ̂_k − (|ψ|²ψ)^_k`; a lone mode `A` rotates as
//! `A e^{i(λ+|A|²)t}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::dispersion;
use crate::solver::field::SpectralField;
use crate::solver::transform::Transform;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dealiased `(|ψ|²ψ)^` on the field's box, via the padded grid.
pub fn nonlinear_term(field: &SpectralField) -> Vec<Complex64> {
    let mut t = Transform::new(field.grid_n());
    let mut out = vec![ZERO; field.coeffs().len()];
    cubic(&mut t, field.coeffs(), field.k_alias(), &mut out);
    out
}

fn cubic(t: &mut Transform, coeffs: &[Complex64], k_alias: i64, out: &mut [Complex64]) {
    t.to_grid(coeffs, k_alias);
    for z in t.grid_mut() {
        *z *= z.norm_sqr();
    }
    t.from_grid(k_alias, out);
}

pub struct Stepper {
    transform: Transform,
    k_alias: i64,
    lambda: Vec<f64>,
    dt: f64,
    e_full: Vec<Complex64>,
    e_half: Vec<Complex64>,
    nonlinear: bool,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl Stepper {
    /// Stepper for fields shaped like `field`.
    pub fn new(field: &SpectralField, dt: f64) -> Result<Self> {
        let len = field.coeffs().len();
        let lambda = field
            .iter()
            .map(|(k, _)| dispersion(k, field.torus()))
            .collect();
        let mut s = Self {
            transform: Transform::new(field.grid_n()),
            k_alias: field.k_alias(),
            lambda,
            dt: 0.0,
            e_full: vec![ZERO; len],
            e_half: vec![ZERO; len],
            nonlinear: true,
            k: std::array::from_fn(|_| vec![ZERO; len]),
            stage: vec![ZERO; len],
        };
        s.set_dt(dt)?;
        Ok(s)
    }

    /// Verification hook: integrate only the linear part.
    pub fn without_nonlinearity(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Negative steps are allowed (time reversal checks).
    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("time step must be nonzero, got {dt}")));
        }
        self.dt = dt;
        for ((ef, eh), &l) in self.e_full.iter_mut().zip(&mut self.e_half).zip(&self.lambda) {
            *ef = Complex64::from_polar(1.0, l * dt);
            *eh = Complex64::from_polar(1.0, 0.5 * l * dt);
        }
        Ok(())
    }

    /// `out = dt · i(|u|²u)^`.
    fn eval(&mut self, which: usize, from_stage: bool, src: &[Complex64]) {
        let out = &mut self.k[which];
        if !self.nonlinear {
            out.fill(ZERO);
            return;
        }
        let input = if from_stage { &self.stage[..] } else { src };
        cubic(&mut self.transform, input, self.k_alias, out);
        let f = I * self.dt;
        out.iter_mut().for_each(|z| *z *= f);
    }

    /// Advance `field` by `dt`.
    pub fn step(&mut self, field: &mut SpectralField) {
        debug_assert_eq!(field.k_alias(), self.k_alias);
        let n = self.lambda.len();
        let psi = field.coeffs_mut();

        self.eval(0, false, psi);
        for i in 0..n {
            self.stage[i] = self.e_half[i] * (psi[i] + 0.5 * self.k[0][i]);
        }
        self.eval(1, true, &[]);
        for i in 0..n {
            self.stage[i] = self.e_half[i] * psi[i] + 0.5 * self.k[1][i];
        }
        self.eval(2, true, &[]);
        for i in 0..n {
            self.stage[i] = self.e_full[i] * psi[i] + self.e_half[i] * self.k[2][i];
        }
        self.eval(3, true, &[]);
        let [k1, k2, k3, k4] = &self.k;
        for i in 0..n {
            psi[i] = self.e_full[i] * psi[i]
                + (self.e_full[i] * k1[i] + 2.0 * self.e_half[i] * (k2[i] + k3[i]) + k4[i]) / 6.0;
        }
        field.time += self.dt;
    }
}
