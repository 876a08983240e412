//! Kinematic level sets of quasi-resonant excitation.
//!
//! Starting from `L1`, level `j+1` collects every mode `k4 = k1 + k2 − k3`
//! outside `L1 ∪ … ∪ Lj` (and inside the search box) that closes a
//! quasi-resonant quartet with three modes drawn from `L1 ∪ … ∪ Lj`.
//!
//! A triple made only of modes from earlier levels was already tried when
//! the previous level was built, so each step only visits triples touching
//! the newest level. Exact resonances are found along lattice lines: with
//! `d1 = k1 − k3` and `d2 = k2 − k3`, the quartet is resonant iff
//! `b·d1.m·d2.m + a·d1.ℓ·d2.ℓ = 0` (`ω² = a/b`), which fixes the direction of
//! `d2`. Non-exact quasi-resonances have `|defect| ≥ 2/b` on a rational
//! torus, which caps `S = Σ|k_i|²` and restricts the brute-force triple scan
//! to small modes.

use std::collections::{BTreeSet, HashSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ModeIndex, TorusKind, TorusSpec};
use crate::resonance::enumerate::{check_budget, QuasiWindow};
use crate::resonance::precision::gcd;
use crate::resonance::quartet::{QuasiResonanceParams, Quartet, WindowNorm};

/// Default half-width of the box candidate fourth modes must lie in.
pub const DEFAULT_SEARCH_BOX: i64 = 128;

/// Disjoint levels `L1, L2, …`, each sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSets {
    pub levels: Vec<Vec<ModeIndex>>,
    /// Expansion stopped because a level came out empty, not because of
    /// `max_level`.
    pub exhausted: bool,
}

impl LevelSets {
    /// Number of nonempty levels (the computed `N`).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn union(&self) -> BTreeSet<ModeIndex> {
        self.levels.iter().flatten().copied().collect()
    }

    /// Modes beyond the first level.
    pub fn excited_count(&self) -> usize {
        self.levels.iter().skip(1).map(Vec::len).sum()
    }

    /// `(m_min, m_max, ℓ_min, ℓ_max)` of the union.
    pub fn bounding_box(&self) -> Option<(i64, i64, i64, i64)> {
        let mut it = self.levels.iter().flatten();
        let first = it.next()?;
        let init = (first.m, first.m, first.l, first.l);
        Some(it.fold(init, |(a, b, c, d), k| {
            (a.min(k.m), b.max(k.m), c.min(k.l), d.max(k.l))
        }))
    }

    /// Whether the union fills its axis-aligned bounding box.
    pub fn union_is_rectangle(&self) -> bool {
        match self.bounding_box() {
            None => false,
            Some((m0, m1, l0, l1)) => {
                let area = ((m1 - m0 + 1) * (l1 - l0 + 1)) as usize;
                area == self.union().len()
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "levels": self.levels,
            "depth": self.depth(),
            "exhausted": self.exhausted,
        })
    }

    /// Plot-ready rows `m,l,level` with levels numbered from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,l,level")?;
        for (j, level) in self.levels.iter().enumerate() {
            for k in level {
                writeln!(out, "{},{},{}", k.m, k.l, j + 1)?;
            }
        }
        Ok(())
    }
}

/// Direction of the exact-resonance line through `k3` for a given `d1`, or
/// `None` when only the trivial `d2 = 0` solves it.
fn resonant_direction(d1: ModeIndex, torus: &TorusSpec, max_step: i64) -> Option<ModeIndex> {
    if d1.m == 0 {
        return Some(ModeIndex::new(1, 0));
    }
    if d1.l == 0 {
        return Some(ModeIndex::new(0, 1));
    }
    if torus.kind() == TorusKind::Irrational {
        return None;
    }
    let a = torus.numerator();
    let b = torus.denominator();
    let x = a.checked_mul(d1.l.unsigned_abs() as u128)?;
    let y = b.checked_mul(d1.m.unsigned_abs() as u128)?;
    let g = gcd(x, y);
    let (x, y) = (x / g, y / g);
    if x > max_step as u128 || y > max_step as u128 {
        return None;
    }
    let sx = if d1.l < 0 { -1 } else { 1 };
    let sy = if d1.m < 0 { 1 } else { -1 };
    Some(ModeIndex::new(sx * x as i64, sy * y as i64))
}

/// Range of `t` with `base + t·dir` inside `[lo, hi]` on one axis.
fn axis_range(base: i64, dir: i64, lo: i64, hi: i64) -> (i64, i64) {
    use std::cmp::Ordering::*;
    match dir.cmp(&0) {
        Equal => {
            if (lo..=hi).contains(&base) {
                (i64::MIN, i64::MAX)
            } else {
                (1, 0)
            }
        }
        Greater => (
            (lo - base).div_euclid(dir) + ((lo - base).rem_euclid(dir) != 0) as i64,
            (hi - base).div_euclid(dir),
        ),
        Less => {
            let (a, b) = axis_range(-base, -dir, -hi, -lo);
            (a, b)
        }
    }
}

struct Expansion<'a> {
    window: QuasiWindow,
    search_box: i64,
    budget: u128,
    cumulative: &'a HashSet<ModeIndex>,
    cumulative_sorted: &'a [ModeIndex],
    newest: &'a HashSet<ModeIndex>,
}

impl Expansion<'_> {
    fn admissible_k4(&self, k4: ModeIndex) -> bool {
        k4.inf_norm() <= self.search_box && !self.cumulative.contains(&k4)
    }

    fn exact_candidates(&self) -> Result<Vec<ModeIndex>> {
        let c = self.cumulative_sorted;
        let n_new = self.newest.len() as u128;
        check_budget(2 * n_new * c.len() as u128, self.budget)?;
        let (m0, m1, l0, l1) = c.iter().fold(
            (i64::MAX, i64::MIN, i64::MAX, i64::MIN),
            |(a, b, d, e), k| (a.min(k.m), b.max(k.m), d.min(k.l), e.max(k.l)),
        );
        let max_step = (m1 - m0).max(l1 - l0).max(1);
        let torus = *self.window.torus();
        let found: Vec<Vec<ModeIndex>> = c
            .par_iter()
            .map(|&k3| {
                let k3_new = self.newest.contains(&k3);
                let mut out = Vec::new();
                for &k1 in c {
                    if !k3_new && !self.newest.contains(&k1) {
                        continue;
                    }
                    let d1 = k1 - k3;
                    if d1 == ModeIndex::ZERO {
                        continue;
                    }
                    let Some(dir) = resonant_direction(d1, &torus, max_step) else {
                        continue;
                    };
                    let (ta, tb) = axis_range(k3.m, dir.m, m0, m1);
                    let (tc, td) = axis_range(k3.l, dir.l, l0, l1);
                    for t in ta.max(tc)..=tb.min(td) {
                        if t == 0 {
                            continue;
                        }
                        let step = ModeIndex::new(t * dir.m, t * dir.l);
                        let k2 = k3 + step;
                        if !self.cumulative.contains(&k2) {
                            continue;
                        }
                        let k4 = k1 + step;
                        if self.admissible_k4(k4) {
                            out.push(k4);
                        }
                    }
                }
                out
            })
            .collect();
        Ok(found.into_iter().flatten().collect())
    }

    /// Largest `S` a non-exact quartet can have while still passing the
    /// window, or `None` if no useful cap exists.
    fn nonexact_norm_cap(&self) -> Option<f64> {
        let torus = self.window.torus();
        let params = self.window.params();
        let b = torus.denominator() as f64;
        // |b·p + a·q| ≥ 2 for a non-exact quartet, so |p + ω²q| ≥ 2/b; keep a
        // factor 2 of slack for the rounding of the float defect.
        let mut cap = (params.lambda * b).powf(1.0 / (1.0 + params.tau));
        if params.norm == WindowNorm::Dispersion {
            // Σλ ≥ min(1, ω²)·Σ|k|², so convert the cap to the index norm.
            cap /= torus.omega_sq().min(1.0);
        }
        let rounding = 1e-15 * (1.0 + torus.omega_sq()) * cap * b;
        (cap.is_finite() && rounding < 0.5).then_some(cap)
    }

    fn nonexact_candidates(&self) -> Result<Vec<ModeIndex>> {
        let cap = self.nonexact_norm_cap();
        let small = |k: &ModeIndex| cap.map_or(true, |c| (k.norm_sq() as f64) <= c);
        let pool: Vec<ModeIndex> = self
            .cumulative_sorted
            .iter()
            .copied()
            .filter(|k| small(k))
            .collect();
        let fresh: Vec<ModeIndex> = pool
            .iter()
            .copied()
            .filter(|k| self.newest.contains(k))
            .collect();
        let n = pool.len() as u128;
        check_budget(2 * fresh.len() as u128 * n * n, self.budget)?;
        let found: Vec<Result<Vec<ModeIndex>>> = fresh
            .par_iter()
            .map(|&kn| {
                let mut out = Vec::new();
                for &x in &pool {
                    for &y in &pool {
                        // kn in the k1 slot (k2 is symmetric) and in the k3 slot.
                        for q in [Quartet::completing(kn, x, y), Quartet::completing(x, y, kn)] {
                            let k4 = q.k4();
                            if !self.admissible_k4(k4) || !small(&k4) {
                                continue;
                            }
                            if self.window.admits(&q)? {
                                out.push(k4);
                            }
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        let mut all = Vec::new();
        for chunk in found {
            all.extend(chunk?);
        }
        Ok(all)
    }
}

/// Expands `l1` into quasi-resonant level sets up to `max_level` levels.
///
/// Candidate fourth modes are restricted to `|k4|∞ ≤ search_box`.
/// Fails with [`Error::WorkBudgetExceeded`] when a level needs more triple
/// evaluations than `budget`.
pub fn expand_levels(
    l1: &[ModeIndex],
    params: &QuasiResonanceParams,
    torus: &TorusSpec,
    max_level: usize,
    search_box: i64,
    budget: u128,
) -> Result<LevelSets> {
    if l1.is_empty() {
        return Err(Error::InvalidParameter("level 1 must be nonempty".into()));
    }
    if max_level < 1 {
        return Err(Error::InvalidParameter("max_level must be >= 1".into()));
    }
    let widest = l1.iter().map(|k| k.inf_norm()).max().unwrap_or(0);
    if search_box < widest {
        return Err(Error::InvalidParameter(format!(
            "search box {search_box} does not contain level 1 (needs {widest})"
        )));
    }
    let first: BTreeSet<ModeIndex> = l1.iter().copied().collect();
    let mut cumulative: HashSet<ModeIndex> = first.iter().copied().collect();
    let mut cumulative_sorted: Vec<ModeIndex> = first.iter().copied().collect();
    let mut newest: HashSet<ModeIndex> = cumulative.clone();
    let mut levels = vec![cumulative_sorted.clone()];
    let window = QuasiWindow::new(
        *params,
        *torus,
        (16 * search_box * search_box) as usize,
    );
    let mut exhausted = false;

    while levels.len() < max_level {
        let step = Expansion {
            window: window.clone(),
            search_box,
            budget,
            cumulative: &cumulative,
            cumulative_sorted: &cumulative_sorted,
            newest: &newest,
        };
        let mut next: BTreeSet<ModeIndex> = step.exact_candidates()?.into_iter().collect();
        next.extend(step.nonexact_candidates()?);
        if next.is_empty() {
            exhausted = true;
            break;
        }
        cumulative.extend(next.iter().copied());
        cumulative_sorted = {
            let mut v: Vec<_> = cumulative.iter().copied().collect();
            v.sort_unstable();
            v
        };
        newest = next.iter().copied().collect();
        levels.push(next.into_iter().collect());
    }
    Ok(LevelSets { levels, exhausted })
}

/// All modes with `|k|∞ ≤ half_width`, the usual choice of `L1`.
pub fn square_level(half_width: i64) -> Vec<ModeIndex> {
    ModeIndex::square(half_width).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::enumerate::DEFAULT_WORK_BUDGET;
    use crate::resonance::quartet::is_quasi_resonant;

    /// Steps 1–4 literally: all ordered triples of the cumulative set.
    fn naive_levels(
        l1: &[ModeIndex],
        params: &QuasiResonanceParams,
        torus: &TorusSpec,
        max_level: usize,
        search_box: i64,
    ) -> LevelSets {
        let mut levels: Vec<Vec<ModeIndex>> = vec![l1.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()];
        let mut exhausted = false;
        while levels.len() < max_level {
            let cum: BTreeSet<ModeIndex> = levels.iter().flatten().copied().collect();
            let mut next = BTreeSet::new();
            for &a in &cum {
                for &b in &cum {
                    for &c in &cum {
                        let q = Quartet::completing(a, b, c);
                        let k4 = q.k4();
                        if k4.inf_norm() <= search_box
                            && !cum.contains(&k4)
                            && is_quasi_resonant(&q, params, torus).unwrap()
                        {
                            next.insert(k4);
                        }
                    }
                }
            }
            if next.is_empty() {
                exhausted = true;
                break;
            }
            levels.push(next.into_iter().collect());
        }
        LevelSets { levels, exhausted }
    }

    #[test]
    fn axis_range_brackets_the_box() {
        assert_eq!(axis_range(0, 2, -5, 5), (-2, 2));
        assert_eq!(axis_range(1, -3, -5, 5), (-1, 2));
        assert_eq!(axis_range(7, 0, -5, 5), (1, 0));
        assert_eq!(axis_range(3, 0, -5, 5), (i64::MIN, i64::MAX));
    }

    #[test]
    fn resonant_direction_is_weighted_perpendicular() {
        let t = TorusSpec::rational(2.0).unwrap();
        let d1 = ModeIndex::new(2, 3);
        let v = resonant_direction(d1, &t, 100).unwrap();
        assert_eq!(d1.m * v.m + 2 * d1.l * v.l, 0);
        assert!(resonant_direction(d1, &TorusSpec::sqrt2(), 100).is_none());
    }

    #[test]
    fn matches_literal_algorithm_on_small_cases() {
        let cases = [
            (TorusSpec::sqrt2(), 30.0, 0.1, 5, 12),
            (TorusSpec::sqrt2(), 20.0, 0.1, 5, 12),
            (TorusSpec::square(), 10.0, 0.1, 3, 7),
            (TorusSpec::rational(2.0).unwrap(), 30.0, 0.1, 3, 7),
            (TorusSpec::rational(0.5).unwrap(), 5.0, 0.5, 3, 6),
        ];
        for ((torus, lambda, tau, max_level, search_box), norm) in cases
            .into_iter()
            .flat_map(|c| [(c, WindowNorm::Index), (c, WindowNorm::Dispersion)])
        {
            let params = QuasiResonanceParams::new(lambda, tau).unwrap().with_norm(norm);
            for l1 in [square_level(1), vec![ModeIndex::new(0, 0), ModeIndex::new(1, 2), ModeIndex::new(-1, 1)]] {
                let fast =
                    expand_levels(&l1, &params, &torus, max_level, search_box, DEFAULT_WORK_BUDGET)
                        .unwrap();
                let slow = naive_levels(&l1, &params, &torus, max_level, search_box);
                assert_eq!(fast, slow, "ω²={} Λ={lambda}", torus.omega_sq());
            }
        }
    }

    #[test]
    fn levels_are_disjoint_and_inside_the_box() {
        let params = QuasiResonanceParams::new(30.0, 0.1).unwrap();
        let sets =
            expand_levels(&square_level(2), &params, &TorusSpec::square(), 4, 10, DEFAULT_WORK_BUDGET)
                .unwrap();
        let total: usize = sets.levels.iter().map(Vec::len).sum();
        assert_eq!(total, sets.union().len());
        assert!(sets.union().iter().all(|k| k.inf_norm() <= 10));
    }

    #[test]
    fn monotone_in_lambda_on_irrational_torus() {
        let torus = TorusSpec::sqrt2();
        let l1 = square_level(2);
        let mut prev: Option<Vec<BTreeSet<ModeIndex>>> = None;
        for lambda in [5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
            let params = QuasiResonanceParams::new(lambda, 0.1)
                .unwrap()
                .with_norm(WindowNorm::Dispersion);
            let sets = expand_levels(&l1, &params, &torus, 6, 64, DEFAULT_WORK_BUDGET).unwrap();
            let cumulative: Vec<BTreeSet<ModeIndex>> = (0..6)
                .map(|j| sets.levels.iter().take(j + 1).flatten().copied().collect())
                .collect();
            if let Some(p) = &prev {
                for (a, b) in p.iter().zip(&cumulative) {
                    assert!(a.is_subset(b), "Λ={lambda}");
                }
            }
            prev = Some(cumulative);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let params = QuasiResonanceParams::new(30.0, 0.1).unwrap();
        let t = TorusSpec::sqrt2();
        assert!(expand_levels(&[], &params, &t, 3, 8, DEFAULT_WORK_BUDGET).is_err());
        assert!(expand_levels(&square_level(2), &params, &t, 0, 8, DEFAULT_WORK_BUDGET).is_err());
        assert!(expand_levels(&square_level(2), &params, &t, 3, 1, DEFAULT_WORK_BUDGET).is_err());
        assert!(matches!(
            expand_levels(&square_level(2), &params, &t, 3, 8, 10),
            Err(Error::WorkBudgetExceeded { .. })
        ));
    }

    #[test]
    fn csv_and_json_exports() {
        let sets = LevelSets {
            levels: vec![vec![ModeIndex::new(0, 0)], vec![ModeIndex::new(1, -1)]],
            exhausted: true,
        };
        let mut buf = Vec::new();
        sets.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m,l,level\n0,0,1\n1,-1,2\n");
        let js = sets.to_json();
        assert_eq!(js["levels"][1][0], serde_json::json!([1, -1]));
        assert_eq!(js["depth"], 2);
    }
}
