mod common;

use common::{k, rectangle, square_sums, tail_direct, threshold_brute};
use num_complex::Complex64;
use proptest::prelude::*;
use tori_core::diagnostics::*;
use tori_core::resonance::*;
use tori_core::solver::SpectralField;
use tori_core::{ModeIndex, SobolevIndex, TorusSpec};

fn mode(r: i64) -> impl Strategy<Value = ModeIndex> {
    (-r..=r, -r..=r).prop_map(|(m, l)| k(m, l))
}

/// Sparse field on `|k|∞ ≤ 6` with amplitudes spanning several decades.
fn field() -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((mode(6), -8.0f64..0.0, 0.0..std::f64::consts::TAU), 1..30).prop_map(
        |modes| {
            let mut f = SpectralField::zeros(TorusSpec::sqrt2(), 32, 8).unwrap();
            for (kk, log_amp, phase) in modes {
                f.set(kk, Complex64::from_polar(10f64.powf(log_amp), phase)).unwrap();
            }
            f
        },
    )
}

fn sobolev() -> impl Strategy<Value = SobolevIndex> {
    (0.0f64..3.0).prop_map(|s| SobolevIndex::new(s).unwrap())
}

proptest! {
    #[test]
    fn defect_symmetries(k1 in mode(500), k2 in mode(500), k3 in mode(500)) {
        let q = Quartet::completing(k1, k2, k3);
        let d = defect(&q).unwrap();
        prop_assert_eq!((d.p, d.q), square_sums(q.modes()));
        let swapped = defect(&Quartet::completing(k2, k1, k3)).unwrap();
        prop_assert_eq!(d, swapped);
        let reversed = defect(&Quartet::new(q.k3(), q.k4(), k1, k2).unwrap()).unwrap();
        prop_assert_eq!((reversed.p, reversed.q), (-d.p, -d.q));
    }

    #[test]
    fn irrational_resonance_is_rectangle(k1 in mode(40), k2 in mode(40), k3 in mode(40)) {
        let q = Quartet::completing(k1, k2, k3);
        let rect = rectangle(k1, k2, k3, q.k4());
        prop_assert_eq!(is_exact_resonant(&q, &TorusSpec::sqrt2()).unwrap(), rect);
        prop_assert_eq!(is_axis_parallel_rectangle(&q), rect);
        // Rectangles resonate on every torus.
        if rect {
            prop_assert!(is_exact_resonant(&q, &TorusSpec::square()).unwrap());
        }
    }

    #[test]
    fn binary_fraction_is_exact(x in 1e-6f64..1e6) {
        let (a, b) = reduce_float_to_fraction(x, FractionMode::Binary).unwrap();
        prop_assert!(b.is_power_of_two());
        prop_assert!(a % 2 == 1 || b == 1);
        prop_assert_eq!(a as f64 / b as f64, x);
    }

    #[test]
    fn tail_is_monotone(f in field(), s in sobolev(), r in 0.0f64..10.0, dr in 0.0f64..3.0) {
        let a = tail_norm(&f, r, s);
        prop_assert!(tail_norm(&f, r + dr, s) <= a * (1.0 + 1e-14));
        prop_assert!((a - tail_direct(&f, r, s)).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn threshold_is_minimal(f in field(), s in sobolev(), frac in 1e-6f64..0.99) {
        let eps = frac * sobolev_norm(&f, s);
        prop_assume!(eps > 0.0);
        let th = threshold_m(&f, eps, s).unwrap();
        prop_assert_eq!(th.radius, threshold_brute(&f, eps, s));
        let smaller = threshold_m(&f, eps * 0.5, s).unwrap();
        prop_assert!(smaller.radius >= th.radius);
    }

    #[test]
    fn hamiltonian_is_gauge_invariant(f in field(), phi in 0.0f64..6.3) {
        let h = hamiltonian(&f);
        let g = hamiltonian(&f.rotated(phi));
        prop_assert!((h.h0 - g.h0).abs() <= 1e-13 * h.h0.abs().max(1e-300));
        prop_assert!((h.p - g.p).abs() <= 1e-12 * h.p.abs().max(1e-300));
        prop_assert!(h.h0 >= 0.0 && h.p >= 0.0);
    }

    #[test]
    fn anisotropy_transposes_to_reciprocal(f in field()) {
        let a = anisotropy_ratio(&spectrum_dump(&f));
        let b = anisotropy_ratio(&spectrum_dump(&f.transposed()));
        if let (Ok(a), Ok(b)) = (a, b) {
            if a.is_finite() && b.is_finite() && a > 0.0 {
                prop_assert!((a * b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn median_is_a_sample_between_bounds(v in prop::collection::vec(-1e3f64..1e3, 1..20)) {
        let e = ensemble_stats(&v).unwrap();
        prop_assert!(e.min <= e.median && e.median <= e.max);
        prop_assert!(v.contains(&e.median));
        let below = v.iter().filter(|x| **x < e.median).count();
        prop_assert!(below <= (v.len() - 1) / 2);
    }
}
