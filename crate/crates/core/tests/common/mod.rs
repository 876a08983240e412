//! Independent oracles: direct sums and brute-force scans that share no
//! code path with the library routines they check.
#![allow(dead_code)]

use num_complex::Complex64;
use tori_core::lattice::sobolev_weight;
use tori_core::solver::SpectralField;
use tori_core::truncated::{Sign, TruncatedState};
use tori_core::{ModeIndex, SobolevIndex, TorusSpec};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn k(m: i64, l: i64) -> ModeIndex {
    ModeIndex::new(m, l)
}

/// `{k1,k2} = {k3,k4}` or the four are the corners `(a,b),(c,d)` /
/// `(a,d),(c,b)` of an axis-parallel rectangle.
pub fn rectangle(k1: ModeIndex, k2: ModeIndex, k3: ModeIndex, k4: ModeIndex) -> bool {
    let same = |a: ModeIndex, b: ModeIndex, c: ModeIndex, d: ModeIndex| {
        (a == c && b == d) || (a == d && b == c)
    };
    same(k1, k2, k3, k4) || same(k(k1.m, k2.l), k(k2.m, k1.l), k3, k4)
}

/// `(Σ±m², Σ±ℓ²)` over `k1 + k2 − k3 − k4`.
pub fn square_sums(q: [ModeIndex; 4]) -> (i128, i128) {
    let sq = |x: i64| (x as i128) * (x as i128);
    (
        sq(q[0].m) + sq(q[1].m) - sq(q[2].m) - sq(q[3].m),
        sq(q[0].l) + sq(q[1].l) - sq(q[2].l) - sq(q[3].l),
    )
}

/// `Σ_{k₁−k₂+k₃=k} ψ̂₁ ψ̂̄₂ ψ̂₃` over the nonzero support, restricted to the box.
pub fn direct_cubic(field: &SpectralField) -> Vec<Complex64> {
    let support: Vec<(ModeIndex, Complex64)> =
        field.iter().filter(|(_, c)| *c != ZERO).collect();
    let mut out = vec![ZERO; field.coeffs().len()];
    for &(k1, a) in &support {
        for &(k2, b) in &support {
            for &(k3, c) in &support {
                if let Some(i) = field.index(k1 - k2 + k3) {
                    out[i] += a * b.conj() * c;
                }
            }
        }
    }
    out
}

/// `¼ Σ_{k₁+k₂=k₃+k₄} ψ̂₁ψ̂₂ψ̂̄₃ψ̂̄₄`.
pub fn direct_quartic(field: &SpectralField) -> f64 {
    let support: Vec<(ModeIndex, Complex64)> =
        field.iter().filter(|(_, c)| *c != ZERO).collect();
    let mut acc = ZERO;
    for &(k1, a) in &support {
        for &(k2, b) in &support {
            for &(k3, c) in &support {
                let k4 = k1 + k2 - k3;
                let d = field.get(k4);
                acc += a * b * c.conj() * d.conj();
            }
        }
    }
    0.25 * acc.re
}

/// Direct `λ_k` from the float ω².
pub fn lambda(k: ModeIndex, torus: &TorusSpec) -> f64 {
    (k.m * k.m) as f64 + torus.omega_sq() * (k.l * k.l) as f64
}

/// Quasi-resonance written out from scratch: exact in integers via
/// `b·Σ±m² + a·Σ±ℓ² = 0` (rational) or both sums zero (irrational), otherwise
/// `|Σ±λ| ≤ Λ S^{−(1+τ)}` with the index-norm `S`.
pub fn quasi_oracle(q: [ModeIndex; 4], lambda_: f64, tau: f64, torus: &TorusSpec) -> bool {
    let (p, r) = square_sums(q);
    let exact = if torus.is_rational() {
        torus.denominator() as i128 * p + torus.numerator() as i128 * r == 0
    } else {
        p == 0 && r == 0
    };
    if exact {
        return true;
    }
    let s: i64 = q.iter().map(|x| x.m * x.m + x.l * x.l).sum();
    let defect = lambda(q[0], torus) + lambda(q[1], torus) - lambda(q[2], torus) - lambda(q[3], torus);
    defect.abs() <= lambda_ * (s as f64).powf(-(1.0 + tau))
}

/// Truncated right-hand side by a quadruple loop over the box.
pub fn rhs_quadruple_loop(
    state: &TruncatedState,
    lambda_: f64,
    tau: f64,
    torus: &TorusSpec,
) -> Vec<Complex64> {
    let n = state.support_box;
    let sigma = match state.sign {
        Sign::Defocusing => 1.0,
        Sign::Focusing => -1.0,
    };
    let modes: Vec<ModeIndex> = ModeIndex::square(n).collect();
    let mut out = Vec::with_capacity(modes.len());
    for &kk in &modes {
        let mut acc = ZERO;
        for &k1 in &modes {
            for &k2 in &modes {
                for &k3 in &modes {
                    if k1 + k2 - k3 != kk {
                        continue;
                    }
                    if quasi_oracle([k1, k2, k3, kk], lambda_, tau, torus) {
                        acc += state.get(k1) * state.get(k2) * state.get(k3).conj();
                    }
                }
            }
        }
        let i = Complex64::new(0.0, 1.0);
        out.push(i * lambda(kk, torus) * state.get(kk) + i * sigma * acc);
    }
    out
}

/// Tail norm by direct summation over `|k| > radius`.
pub fn tail_direct(field: &SpectralField, radius: f64, s: SobolevIndex) -> f64 {
    let mut acc = 0.0;
    for (kk, c) in field.iter() {
        if ((kk.m * kk.m + kk.l * kk.l) as f64).sqrt() > radius {
            acc += (1.0 + (kk.m * kk.m + kk.l * kk.l) as f64).powf(s.value()) * c.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Scan of the candidate radii `{0} ∪ {|k| : ψ̂_k ≠ 0}` in increasing order.
pub fn threshold_brute(field: &SpectralField, eps: f64, s: SobolevIndex) -> f64 {
    let mut radii: Vec<i64> = field
        .iter()
        .filter(|(_, c)| *c != ZERO)
        .map(|(kk, _)| kk.m * kk.m + kk.l * kk.l)
        .collect();
    radii.push(0);
    radii.sort_unstable();
    radii.dedup();
    for r2 in radii {
        let r = (r2 as f64).sqrt();
        if tail_direct(field, r, s) <= eps {
            return r;
        }
    }
    unreachable!("the outermost radius has an empty tail")
}

/// Sobolev norm written out directly.
pub fn sobolev_direct(field: &SpectralField, s: SobolevIndex) -> f64 {
    field
        .iter()
        .map(|(kk, c)| sobolev_weight(kk, s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Relative max-norm difference of two coefficient vectors.
pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// A few deterministic pseudo-random coefficients.
pub fn scrambled(i: usize) -> Complex64 {
    let x = (i as f64 + 1.0) * 0.754_877_666;
    Complex64::new((x * 12.9898).sin() * 0.5, (x * 78.233).cos() * 0.5)
}
