mod common;

use common::{direct_quartic, k, scrambled, tail_direct, threshold_brute};
use num_complex::Complex64;
use tori_core::diagnostics::*;
use tori_core::solver::{make_initial_condition, SpectralField};
use tori_core::{ModeIndex, SobolevIndex, TorusSpec};

fn s(x: f64) -> SobolevIndex {
    SobolevIndex::new(x).unwrap()
}

fn one_mode(m: i64, l: i64, torus: TorusSpec) -> SpectralField {
    let mut f = SpectralField::zeros(torus, 32, 8).unwrap();
    f.set(k(m, l), Complex64::new(1.0, 0.0)).unwrap();
    f
}

#[test]
fn sobolev_examples() {
    let zero = SpectralField::zeros(TorusSpec::sqrt2(), 16, 4).unwrap();
    assert_eq!(sobolev_norm(&zero, s(2.0)), 0.0);
    assert_eq!(sobolev_norm(&one_mode(1, 0, TorusSpec::sqrt2()), s(2.0)), 2.0);
}

#[test]
fn tail_boundary_is_strict() {
    let f = one_mode(3, 4, TorusSpec::sqrt2());
    assert_eq!(tail_norm(&f, 4.9, s(0.0)), 1.0);
    assert_eq!(tail_norm(&f, 5.0, s(0.0)), 0.0);
}

#[test]
fn tail_at_zero_drops_only_the_zero_mode() {
    let mut f = SpectralField::zeros(TorusSpec::sqrt2(), 32, 8).unwrap();
    for (i, kk) in ModeIndex::square(3).enumerate() {
        f.set(kk, scrambled(i)).unwrap();
    }
    let t0 = tail_norm(&f, 0.0, s(1.5));
    let total = sobolev_norm(&f, s(1.5));
    let zero = f.get(k(0, 0)).norm_sqr();
    assert!((t0 * t0 + zero - total * total).abs() < 1e-13 * total * total);
    let mut last = f64::INFINITY;
    for r in 0..12 {
        let t = tail_norm(&f, r as f64 * 0.5, s(1.5));
        assert!(t <= last);
        last = t;
    }
    assert_eq!(tail_norm(&f, 3.0 * 2f64.sqrt(), s(1.5)), 0.0);
}

fn exponential_field() -> SpectralField {
    let mut f = SpectralField::zeros(TorusSpec::sqrt2(), 64, 16).unwrap();
    for kk in ModeIndex::square(16) {
        let amp = (-kk.norm()).exp().sqrt();
        f.set(kk, Complex64::from_polar(amp, kk.m as f64)).unwrap();
    }
    f
}

#[test]
fn threshold_matches_brute_force() {
    let f = exponential_field();
    for sx in [0.0, 1.0, 2.0] {
        let total = sobolev_norm(&f, s(sx));
        // Shrinking ε never shrinks M.
        let mut last = 0.0;
        for frac in [0.5, 0.2, 0.1, 0.05, 0.01, 1e-4, 1e-8] {
            let eps = frac * total;
            let th = threshold_m(&f, eps, s(sx)).unwrap();
            assert!(!th.epsilon_exceeds_norm);
            assert_eq!(th.radius, threshold_brute(&f, eps, s(sx)), "s={sx} eps={frac}");
            assert!(tail_direct(&f, th.radius, s(sx)) <= eps);
            assert!(th.radius >= last);
            last = th.radius;
        }
    }
}

#[test]
fn threshold_edge_cases() {
    let f = make_initial_condition(1.8263, s(2.0), 5, TorusSpec::sqrt2(), 32, 8).unwrap();
    let total = sobolev_norm(&f, s(2.0));
    // No zero mode: just above the norm gives M = 0, just below needs M > 0.
    let at = threshold_m(&f, total * (1.0 + 1e-12), s(2.0)).unwrap();
    assert_eq!(at.radius, 0.0);
    assert!(threshold_m(&f, total * (1.0 - 1e-12), s(2.0)).unwrap().radius > 0.0);
    let over = threshold_m(&f, 2.0 * total, s(2.0)).unwrap();
    assert!(over.epsilon_exceeds_norm && over.radius == 0.0);
    for frac in [0.9, 0.5, 0.1, 0.01] {
        let th = threshold_m(&f, frac * total, s(2.0)).unwrap();
        assert!(th.radius <= 8f64.sqrt());
    }
    assert!(threshold_m(&f, 0.0, s(2.0)).is_err());
}

#[test]
fn hamiltonian_examples() {
    let zero = SpectralField::zeros(TorusSpec::sqrt2(), 16, 4).unwrap();
    assert_eq!(hamiltonian(&zero).total(), 0.0);
    let h = hamiltonian(&one_mode(1, 0, TorusSpec::rational(2.0).unwrap()));
    assert!((h.h0 - 0.5).abs() < 1e-15);
    assert!((h.p - 0.25).abs() < 1e-15);
    assert!((h.total() - 0.75).abs() < 1e-15);
}

#[test]
fn quartic_term_two_ways() {
    let mut f = SpectralField::zeros(TorusSpec::sqrt2(), 32, 8).unwrap();
    for (i, kk) in [k(0, 1), k(2, -1), k(-1, -1), k(1, 2), k(-2, 0)].into_iter().enumerate() {
        f.set(kk, scrambled(i + 3)).unwrap();
    }
    let p = hamiltonian(&f).p;
    let direct = direct_quartic(&f);
    assert!((p - direct).abs() < 1e-12 * direct.abs());
}

#[test]
fn hamiltonian_symmetries() {
    let f = make_initial_condition(2.0, s(2.0), 9, TorusSpec::sqrt2(), 32, 8).unwrap();
    let h = hamiltonian(&f);
    let rot = hamiltonian(&f.rotated(1.234));
    assert!((h.total() - rot.total()).abs() < 1e-13 * h.total());
    let refl = hamiltonian(&f.reflected());
    assert!((h.h0 - refl.h0).abs() < 1e-13 * h.h0);
    assert!((h.p - refl.p).abs() < 1e-13 * h.p);
}

#[test]
fn spectrum_of_initial_data() {
    let f = make_initial_condition(1.8263, s(2.0), 1, TorusSpec::sqrt2(), 32, 8).unwrap();
    let spec = spectrum_dump(&f);
    let c2 = (1.8263f64 / 764f64.sqrt()).powi(2);
    let nonzero: Vec<f64> = spec.energy.iter().copied().filter(|e| *e > 0.0).collect();
    assert_eq!(nonzero.len(), 24);
    assert!(nonzero.iter().all(|e| (e - c2).abs() < 1e-15));
    assert_eq!(spec.modes().find(|(kk, _)| *kk == k(0, 0)).unwrap().1, 0.0);
    assert!((spec.total() - f.mass()).abs() < 1e-12 * f.mass());
    assert!((anisotropy_ratio(&spec).unwrap() - 1.0).abs() < 1e-14);
    let mut csv = Vec::new();
    spec.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 17 * 17);
    assert_eq!(text.lines().next(), Some("m,l,energy"));
}

#[test]
fn anisotropy_cases() {
    let spec = spectrum_dump(&one_mode(3, 0, TorusSpec::sqrt2()));
    assert_eq!(anisotropy_ratio(&spec).unwrap(), f64::INFINITY);
    let zero = spectrum_dump(&SpectralField::zeros(TorusSpec::sqrt2(), 16, 4).unwrap());
    assert!(anisotropy_ratio(&zero).is_err());
    let mut f = SpectralField::zeros(TorusSpec::sqrt2(), 32, 8).unwrap();
    for (i, kk) in ModeIndex::square(3).enumerate() {
        f.set(kk, scrambled(i) * (1.0 + kk.m.abs() as f64)).unwrap();
    }
    let a = anisotropy_ratio(&spectrum_dump(&f)).unwrap();
    let b = anisotropy_ratio(&spectrum_dump(&f.transposed())).unwrap();
    assert!((a * b - 1.0).abs() < 1e-13);
    assert!(a > 1.0);
}

#[test]
fn ensemble_examples() {
    let e = |v: &[f64]| {
        let r = ensemble_stats(v).unwrap();
        (r.median, r.min, r.max)
    };
    assert_eq!(e(&[3.0]), (3.0, 3.0, 3.0));
    assert_eq!(e(&[1.0, 2.0, 3.0, 4.0, 5.0]), (3.0, 1.0, 5.0));
    assert_eq!(e(&[5.0, 4.0, 1.0, 3.0, 2.0]), (3.0, 1.0, 5.0));
    assert_eq!(e(&[2.0, 1.0]), (1.0, 1.0, 2.0));
    assert!(ensemble_stats(&[]).is_err());
    let t = ThresholdResult::new(vec![4.0, 2.0, 3.0], 0.1, 1.8263, 20.0, 2.0).unwrap();
    assert!(t.min_m <= t.median_m && t.median_m <= t.max_m);
}

#[test]
fn series_csv_schema() {
    let series = DiagnosticSeries {
        realization_id: 0,
        config_hash: "x".into(),
        s: 2.0,
        tail_radii: vec![4.0, 8.5],
        records: vec![DiagnosticRecord {
            t: 0.0,
            mass: 1.0,
            hamiltonian: 2.0,
            sobolev: 3.0,
            tails: vec![0.5, 0.25],
        }],
    };
    let mut out = Vec::new();
    series.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mass,hamiltonian,sobolev_2,tail_4,tail_8.5"));
    assert_eq!(lines.next(), Some("0e0,1e0,2e0,3e0,5e-1,2.5e-1"));
}
