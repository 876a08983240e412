//! Quartets, their exact frequency defect and the resonance predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dispersion, ModeIndex, TorusKind, TorusSpec};

/// Four modes with `k1 + k2 − k3 − k4 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[ModeIndex; 4]", into = "[ModeIndex; 4]")]
pub struct Quartet {
    k1: ModeIndex,
    k2: ModeIndex,
    k3: ModeIndex,
    k4: ModeIndex,
}

impl Quartet {
    pub fn new(k1: ModeIndex, k2: ModeIndex, k3: ModeIndex, k4: ModeIndex) -> Result<Self> {
        let wide = |k: ModeIndex| (k.m as i128, k.l as i128);
        let (a, b, c, d) = (wide(k1), wide(k2), wide(k3), wide(k4));
        if a.0 + b.0 != c.0 + d.0 || a.1 + b.1 != c.1 + d.1 {
            return Err(Error::InvalidParameter(format!(
                "quartet {k1} {k2} {k3} {k4} violates k1 + k2 = k3 + k4"
            )));
        }
        Ok(Self { k1, k2, k3, k4 })
    }

    /// The quartet whose fourth mode closes `k4 = k1 + k2 − k3`.
    pub fn completing(k1: ModeIndex, k2: ModeIndex, k3: ModeIndex) -> Self {
        Self {
            k1,
            k2,
            k3,
            k4: k1 + k2 - k3,
        }
    }

    pub fn k1(&self) -> ModeIndex {
        self.k1
    }
    pub fn k2(&self) -> ModeIndex {
        self.k2
    }
    pub fn k3(&self) -> ModeIndex {
        self.k3
    }
    pub fn k4(&self) -> ModeIndex {
        self.k4
    }

    pub fn modes(&self) -> [ModeIndex; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }

    /// Representative under `k1 ↔ k2` and `k3 ↔ k4`: each pair sorted.
    pub fn canonical(&self) -> Self {
        let (k1, k2) = if self.k1 <= self.k2 {
            (self.k1, self.k2)
        } else {
            (self.k2, self.k1)
        };
        let (k3, k4) = if self.k3 <= self.k4 {
            (self.k3, self.k4)
        } else {
            (self.k4, self.k3)
        };
        Self { k1, k2, k3, k4 }
    }

    /// `|k1|² + |k2|² + |k3|² + |k4|²`.
    pub fn norm_sq_sum(&self) -> i64 {
        self.modes().iter().map(|k| k.norm_sq()).sum()
    }

    /// `max |k_i|∞` over the four modes.
    pub fn inf_extent(&self) -> i64 {
        self.modes().iter().map(|k| k.inf_norm()).max().unwrap_or(0)
    }
}

impl TryFrom<[ModeIndex; 4]> for Quartet {
    type Error = Error;
    fn try_from([a, b, c, d]: [ModeIndex; 4]) -> Result<Self> {
        Quartet::new(a, b, c, d)
    }
}

impl From<Quartet> for [ModeIndex; 4] {
    fn from(q: Quartet) -> Self {
        q.modes()
    }
}

/// Exact integers with `λ_{k1} + λ_{k2} − λ_{k3} − λ_{k4} = p + ω² q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefectPair {
    pub p: i128,
    pub q: i128,
}

impl DefectPair {
    pub fn is_zero(&self) -> bool {
        self.p == 0 && self.q == 0
    }

    /// `p + ω² q` in floating point.
    pub fn value(&self, torus: &TorusSpec) -> f64 {
        self.p as f64 + torus.omega_sq() * self.q as f64
    }
}

/// Which squared mode norm enters the window sum `S = Σ|k_i|²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowNorm {
    /// Integer index norm `m² + ℓ²`.
    #[default]
    Index,
    /// Physical wavenumber norm `m² + ω²ℓ² = λ_k`.
    Dispersion,
}

/// Parameters `(Λ, τ)` of the quasi-resonance window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiResonanceParams {
    pub lambda: f64,
    pub tau: f64,
    #[serde(default)]
    pub norm: WindowNorm,
}

impl QuasiResonanceParams {
    pub fn new(lambda: f64, tau: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quasi-resonance needs Λ > 0 and τ > 0, got Λ={lambda}, τ={tau}"
            )));
        }
        Ok(Self {
            lambda,
            tau,
            norm: WindowNorm::Index,
        })
    }

    pub fn with_norm(self, norm: WindowNorm) -> Self {
        Self { norm, ..self }
    }

    /// Right-hand side `Λ / S^{1+τ}`.
    pub fn bound(&self, window_sum: f64) -> f64 {
        self.lambda * window_sum.powf(-(1.0 + self.tau))
    }

    /// `S` for this quartet under the configured norm.
    pub fn window_sum(&self, q: &Quartet, torus: &TorusSpec) -> f64 {
        match self.norm {
            WindowNorm::Index => q.norm_sq_sum() as f64,
            WindowNorm::Dispersion => q.modes().iter().map(|&k| dispersion(k, torus)).sum(),
        }
    }
}

fn sq(x: i64) -> Result<i128> {
    (x as i128)
        .checked_mul(x as i128)
        .ok_or(Error::Overflow("defect square"))
}

fn signed_sum(a: i64, b: i64, c: i64, d: i64) -> Result<i128> {
    sq(a)?
        .checked_add(sq(b)?)
        .and_then(|s| s.checked_sub(sq(c).ok()?))
        .and_then(|s| s.checked_sub(sq(d).ok()?))
        .ok_or(Error::Overflow("defect sum"))
}

/// `p = m1² + m2² − m3² − m4²`, `q = ℓ1² + ℓ2² − ℓ3² − ℓ4²`.
pub fn defect(q: &Quartet) -> Result<DefectPair> {
    Ok(DefectPair {
        p: signed_sum(q.k1.m, q.k2.m, q.k3.m, q.k4.m)?,
        q: signed_sum(q.k1.l, q.k2.l, q.k3.l, q.k4.l)?,
    })
}

/// Exact resonance `λ_{k1} + λ_{k2} = λ_{k3} + λ_{k4}` decided in integers.
///
/// On an irrational torus this is `p = q = 0`; on a rational torus with
/// `ω² = a/b` it is `b·p + a·q = 0`.
pub fn is_defect_exact(d: &DefectPair, torus: &TorusSpec) -> bool {
    match torus.kind() {
        TorusKind::Irrational => d.is_zero(),
        TorusKind::Rational => {
            // b·p + a·q = 0 with gcd(a, b) = 1 iff q = b·t and p = −a·t.
            let a = torus.numerator() as i128;
            let b = torus.denominator() as i128;
            if d.q % b != 0 {
                return false;
            }
            let t = d.q / b;
            a.checked_mul(t).and_then(|at| at.checked_add(d.p)) == Some(0)
        }
    }
}

pub fn is_exact_resonant(q: &Quartet, torus: &TorusSpec) -> Result<bool> {
    Ok(is_defect_exact(&defect(q)?, torus))
}

/// Multisets `{m1, m2} = {m3, m4}` and `{ℓ1, ℓ2} = {ℓ3, ℓ4}`.
pub fn is_axis_parallel_rectangle(q: &Quartet) -> bool {
    let same = |a: i64, b: i64, c: i64, d: i64| (a == c && b == d) || (a == d && b == c);
    same(q.k1.m, q.k2.m, q.k3.m, q.k4.m) && same(q.k1.l, q.k2.l, q.k3.l, q.k4.l)
}

/// Quasi-resonance window test with a precomputed defect.
///
/// Exact resonances always pass (this covers the all-zero quartet, for which
/// the window is undefined); otherwise `|p + ω² q| ≤ Λ S^{−(1+τ)}`.
pub fn defect_in_window(
    d: &DefectPair,
    window_sum: f64,
    params: &QuasiResonanceParams,
    torus: &TorusSpec,
) -> bool {
    if is_defect_exact(d, torus) {
        return true;
    }
    d.value(torus).abs() <= params.bound(window_sum)
}

pub fn is_quasi_resonant(
    q: &Quartet,
    params: &QuasiResonanceParams,
    torus: &TorusSpec,
) -> Result<bool> {
    Ok(defect_in_window(
        &defect(q)?,
        params.window_sum(q, torus),
        params,
        torus,
    ))
}
