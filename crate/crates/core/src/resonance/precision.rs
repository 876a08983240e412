//! Finite-precision audit of a floating-point aspect ratio.
//!
//! A stored double `ω*² = a/b` (reduced) can only create a spurious exact
//! resonance `b·Δm₁₃Δm₂₃ = −a·Δℓ₁₃Δℓ₂₃ ≠ 0` if `a` divides the `m`-product and
//! `b` divides the `ℓ`-product. On a mode box whose largest index difference
//! is `K`, both products are bounded by `K²`, so `K² < max(a, b)` rules it out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a double is turned into a fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionMode {
    /// Exact rational value of the IEEE-754 double.
    Binary,
    /// Value of the shortest decimal literal that round-trips to the double.
    Decimal,
}

pub(crate) fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Reduced `(a, b)` with `a/b` equal to `value` under `mode`.
///
/// Fails for non-finite or non-positive input and for values whose
/// fraction does not fit in 127 bits (so both parts convert to `i128`).
pub fn reduce_float_to_fraction(value: f64, mode: FractionMode) -> Result<(u128, u128)> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cannot reduce {value} to a positive fraction"
        )));
    }
    match mode {
        FractionMode::Binary => binary_fraction(value),
        FractionMode::Decimal => decimal_fraction(value),
    }
}

fn binary_fraction(value: f64) -> Result<(u128, u128)> {
    let bits = value.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = mantissa.trailing_zeros();
    mantissa >>= tz;
    exp += tz as i32;
    let mantissa = mantissa as u128;
    if exp >= 0 {
        if mantissa.leading_zeros() <= exp as u32 + 1 {
            return Err(Error::Overflow("binary fraction numerator"));
        }
        Ok((mantissa << exp, 1))
    } else {
        let shift = (-exp) as u32;
        if shift >= 127 {
            return Err(Error::Overflow("binary fraction denominator"));
        }
        Ok((mantissa, 1u128 << shift))
    }
}

fn decimal_fraction(value: f64) -> Result<(u128, u128)> {
    // `{:e}` prints the shortest round-trip digits, e.g. "1.414213562373095e0".
    let text = format!("{value:e}");
    let (mantissa, exponent) = text
        .split_once('e')
        .ok_or_else(|| Error::Format(format!("unexpected float rendering {text}")))?;
    let exponent: i32 = exponent
        .parse()
        .map_err(|_| Error::Format(format!("bad exponent in {text}")))?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: u128 = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| Error::Format(format!("bad digits in {text}")))?;
    let scale = exponent - frac_part.len() as i32;
    let pow10 = |e: u32| 10u128.checked_pow(e).ok_or(Error::Overflow("decimal fraction"));
    let (a, b) = if scale >= 0 {
        let a = digits
            .checked_mul(pow10(scale as u32)?)
            .ok_or(Error::Overflow("decimal fraction numerator"))?;
        (a, 1)
    } else {
        (digits, pow10((-scale) as u32)?)
    };
    let g = gcd(a, b);
    Ok((a / g, b / g))
}

/// `K² < max(a, b)`: no spurious exact resonance on a box whose largest mode
/// index difference is `k_max`.
pub fn audit_precision(k_max: u64, a: u128, b: u128) -> bool {
    let k = k_max as u128;
    k * k < a.max(b)
}

/// Everything the precision audit reports about one aspect value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionAudit {
    pub omega_sq: f64,
    pub mode: FractionMode,
    pub a: u128,
    pub b: u128,
    pub k: u64,
    pub k_sq: u128,
    pub max_ab: u128,
    pub passes: bool,
}

pub fn audit(omega_sq: f64, k_max: u64, mode: FractionMode) -> Result<PrecisionAudit> {
    let (a, b) = reduce_float_to_fraction(omega_sq, mode)?;
    let k_sq = (k_max as u128) * (k_max as u128);
    Ok(PrecisionAudit {
        omega_sq,
        mode,
        a,
        b,
        k: k_max,
        k_sq,
        max_ab: a.max(b),
        passes: audit_precision(k_max, a, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_route_reproduces_quoted_fraction() {
        let (a, b) = reduce_float_to_fraction(1.414213562373095, FractionMode::Decimal).unwrap();
        assert_eq!(a, 282842712474619);
        assert_eq!(b, 200000000000000);
    }

    #[test]
    fn simple_fractions() {
        for mode in [FractionMode::Binary, FractionMode::Decimal] {
            assert_eq!(reduce_float_to_fraction(0.5, mode).unwrap(), (1, 2));
            assert_eq!(reduce_float_to_fraction(1.25, mode).unwrap(), (5, 4));
            assert_eq!(reduce_float_to_fraction(1.0, mode).unwrap(), (1, 1));
            assert_eq!(reduce_float_to_fraction(3.0e10, mode).unwrap(), (30_000_000_000, 1));
        }
        assert_eq!(reduce_float_to_fraction(0.1, FractionMode::Decimal).unwrap(), (1, 10));
        // 0.1 is not dyadic; its exact binary value has a 2^55 denominator.
        let (a, b) = reduce_float_to_fraction(0.1, FractionMode::Binary).unwrap();
        assert_eq!(b, 1u128 << 55);
        assert_eq!(a, 3602879701896397);
    }

    #[test]
    fn binary_route_is_exact() {
        for x in [1.414213562373095, std::f64::consts::PI, 1e-5, 12345.678, 1.0 / 3.0] {
            let (a, b) = reduce_float_to_fraction(x, FractionMode::Binary).unwrap();
            assert_eq!(gcd(a, b), 1);
            assert!(b.is_power_of_two());
            assert_eq!(a as f64 / b as f64, x);
        }
    }

    #[test]
    fn rejects_non_finite_and_out_of_range() {
        assert!(reduce_float_to_fraction(f64::INFINITY, FractionMode::Binary).is_err());
        assert!(reduce_float_to_fraction(f64::NAN, FractionMode::Decimal).is_err());
        assert!(reduce_float_to_fraction(-1.0, FractionMode::Decimal).is_err());
        assert!(reduce_float_to_fraction(1e300, FractionMode::Binary).is_err());
        assert!(reduce_float_to_fraction(1e-300, FractionMode::Decimal).is_err());
    }

    #[test]
    fn audit_examples() {
        assert!(audit_precision(512, 282842712474619, 200000000000000));
        assert!(!audit_precision(1, 1, 1));
        let (a, b) = reduce_float_to_fraction(370723.0 / 262144.0, FractionMode::Binary).unwrap();
        assert_eq!((a, b), (370723, 262144));
        assert!(audit_precision(512, a, b));
        assert!(audit_precision(608, a, b));
        assert!(!audit_precision(609, a, b));
        let rep = audit(1.0, 2, FractionMode::Decimal).unwrap();
        assert!(!rep.passes);
        assert_eq!(rep.max_ab, 1);
    }
}
