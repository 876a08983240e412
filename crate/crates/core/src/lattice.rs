//! Mode-index arithmetic, the torus dispersion relation and Sobolev weights.
//!
//! A Fourier mode on the torus `[0, 2π) × [0, 2π/ω)` is indexed by an integer
//! pair `k = (m, ℓ)` and oscillates with frequency `λ_k = m² + ω²ℓ²`.
//! Sobolev weights use the plain index norm `|k|² = m² + ℓ²`, not the
//! ω-weighted one.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::precision::{reduce_float_to_fraction, FractionMode};

/// Integer lattice point `(m, ℓ)` labelling a Fourier mode.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct ModeIndex {
    pub m: i64,
    pub l: i64,
}

impl ModeIndex {
    pub const ZERO: ModeIndex = ModeIndex { m: 0, l: 0 };

    pub const fn new(m: i64, l: i64) -> Self {
        Self { m, l }
    }

    /// `m² + ℓ²`.
    pub fn norm_sq(self) -> i64 {
        self.m * self.m + self.l * self.l
    }

    /// Euclidean index norm `|k|`.
    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// `max(|m|, |ℓ|)`.
    pub fn inf_norm(self) -> i64 {
        self.m.abs().max(self.l.abs())
    }

    /// All modes with `|k|∞ ≤ half_width`, row-major (m outer, ℓ inner).
    pub fn square(half_width: i64) -> impl Iterator<Item = ModeIndex> {
        (-half_width..=half_width)
            .flat_map(move |m| (-half_width..=half_width).map(move |l| ModeIndex::new(m, l)))
    }
}

impl Add for ModeIndex {
    type Output = ModeIndex;
    fn add(self, rhs: ModeIndex) -> ModeIndex {
        ModeIndex::new(self.m + rhs.m, self.l + rhs.l)
    }
}

impl Sub for ModeIndex {
    type Output = ModeIndex;
    fn sub(self, rhs: ModeIndex) -> ModeIndex {
        ModeIndex::new(self.m - rhs.m, self.l - rhs.l)
    }
}

impl Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex::new(-self.m, -self.l)
    }
}

impl From<[i64; 2]> for ModeIndex {
    fn from([m, l]: [i64; 2]) -> Self {
        ModeIndex::new(m, l)
    }
}

impl From<ModeIndex> for [i64; 2] {
    fn from(k: ModeIndex) -> Self {
        [k.m, k.l]
    }
}

impl From<(i64, i64)> for ModeIndex {
    fn from((m, l): (i64, i64)) -> Self {
        ModeIndex::new(m, l)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.l)
    }
}

/// Whether `ω²` is meant as a rational aspect ratio or as a floating-point
/// stand-in for an irrational one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusKind {
    Rational,
    Irrational,
}

/// Aspect parameter `ω²` of the torus.
///
/// The float and its exact rational value `num/den` are stored side by side;
/// every exact resonance decision goes through the fraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TorusInput", into = "TorusRepr")]
pub struct TorusSpec {
    omega_sq: f64,
    num: u128,
    den: u128,
    kind: TorusKind,
}

#[derive(Serialize, Deserialize)]
struct TorusRepr {
    omega_sq: f64,
    kind: TorusKind,
}

/// Either the full form or one of the names `"square"` and `"sqrt2"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum TorusInput {
    Named(String),
    Full(TorusRepr),
}

impl TryFrom<TorusInput> for TorusSpec {
    type Error = Error;
    fn try_from(r: TorusInput) -> Result<Self> {
        match r {
            TorusInput::Full(r) => TorusSpec::new(r.omega_sq, r.kind),
            TorusInput::Named(n) => match n.as_str() {
                "square" => Ok(TorusSpec::square()),
                "sqrt2" => Ok(TorusSpec::sqrt2()),
                _ => Err(Error::InvalidParameter(format!(
                    "unknown torus `{n}`, expected \"square\", \"sqrt2\" or {{\"omega_sq\", \"kind\"}}"
                ))),
            },
        }
    }
}

impl From<TorusSpec> for TorusRepr {
    fn from(t: TorusSpec) -> Self {
        TorusRepr {
            omega_sq: t.omega_sq,
            kind: t.kind,
        }
    }
}

/// The double nearest to `√2` as quoted to 16 significant digits, the
/// value used for the irrational torus throughout.
pub const SQRT2_APPROX: f64 = 1.414213562373095;

impl TorusSpec {
    /// Builds a torus from the stored double; the fraction is the exact
    /// binary value of that double.
    pub fn new(omega_sq: f64, kind: TorusKind) -> Result<Self> {
        if !omega_sq.is_finite() || omega_sq <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega_sq must be positive and finite, got {omega_sq}"
            )));
        }
        let (num, den) = reduce_float_to_fraction(omega_sq, FractionMode::Binary)?;
        Ok(Self {
            omega_sq,
            num,
            den,
            kind,
        })
    }

    /// Square torus, `ω² = 1`.
    pub fn square() -> Self {
        Self::new(1.0, TorusKind::Rational).expect("1.0 is a valid aspect")
    }

    /// Irrational torus with `ω²` approximated by [`SQRT2_APPROX`].
    pub fn sqrt2() -> Self {
        Self::new(SQRT2_APPROX, TorusKind::Irrational).expect("√2 is a valid aspect")
    }

    pub fn rational(omega_sq: f64) -> Result<Self> {
        Self::new(omega_sq, TorusKind::Rational)
    }

    pub fn irrational(omega_sq: f64) -> Result<Self> {
        Self::new(omega_sq, TorusKind::Irrational)
    }

    pub fn omega_sq(&self) -> f64 {
        self.omega_sq
    }

    /// Reduced numerator `a` of `ω² = a/b`.
    pub fn numerator(&self) -> u128 {
        self.num
    }

    /// Reduced denominator `b` of `ω² = a/b`.
    pub fn denominator(&self) -> u128 {
        self.den
    }

    pub fn kind(&self) -> TorusKind {
        self.kind
    }

    pub fn is_rational(&self) -> bool {
        self.kind == TorusKind::Rational
    }
}

/// Nonnegative Sobolev index `s`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Sobolev index must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        SobolevIndex::new(s)
    }
}

impl From<SobolevIndex> for f64 {
    fn from(s: SobolevIndex) -> f64 {
        s.0
    }
}

/// `λ_k = m² + ω²ℓ²`.
pub fn dispersion(k: ModeIndex, torus: &TorusSpec) -> f64 {
    let m = k.m as f64;
    let l = k.l as f64;
    m * m + torus.omega_sq * (l * l)
}

/// `⟨k⟩^{2s} = (1 + m² + ℓ²)^s`.
pub fn sobolev_weight(k: ModeIndex, s: SobolevIndex) -> f64 {
    (1.0 + k.norm_sq() as f64).powf(s.0)
}

/// Split weight `(1 + m²)^s + (1 + ℓ²)^s` used by the cut-off norm.
pub fn split_weight(k: ModeIndex, s: SobolevIndex) -> f64 {
    let m = k.m as f64;
    let l = k.l as f64;
    (1.0 + m * m).powf(s.0) + (1.0 + l * l).powf(s.0)
}
