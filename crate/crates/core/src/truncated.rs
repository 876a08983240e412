//! The quasi-resonant truncation
//! `ż_k = iλ_k z_k + iσ Σ_{k=k₁+k₂−k₃} z_{k₁} z_{k₂} z̄_{k₃}`, the sum running
//! over ordered triples that close a quasi-resonant quartet inside the box.
//! `σ = +1` is defocusing, `σ = −1` focusing.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dispersion, split_weight, ModeIndex, SobolevIndex, TorusSpec};
use crate::resonance::{
    defect, enumerate_exact_resonant_quartets, enumerate_quasi_resonant_quartets,
    is_defect_exact, QuasiResonanceParams, Quartet,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One ordered triple feeding mode `k = k1 + k2 − k3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub k: ModeIndex,
    pub k1: ModeIndex,
    pub k2: ModeIndex,
    pub k3: ModeIndex,
    /// `λ_{k₁} + λ_{k₂} − λ_{k₃} − λ_k`, from the exact defect pair.
    pub theta: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuartetTable {
    pub support_box: i64,
    /// `None` for the exact-resonance (`Λ → 0⁺`) table.
    pub params: Option<QuasiResonanceParams>,
    pub torus: TorusSpec,
    /// Grouped by output mode in box order, triples lexicographic within.
    pub entries: Vec<TableEntry>,
    /// `entries[offsets[i]..offsets[i+1]]` feed the `i`-th box mode.
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    idx: Vec<[u32; 3]>,
}

fn box_index(k: ModeIndex, half_width: i64) -> usize {
    let side = 2 * half_width + 1;
    ((k.m + half_width) * side + k.l + half_width) as usize
}

impl QuartetTable {
    /// Every ordered triple in the box that closes a quasi-resonant quartet.
    pub fn build(
        support_box: i64,
        params: &QuasiResonanceParams,
        torus: &TorusSpec,
        budget: u128,
    ) -> Result<Self> {
        let quartets = enumerate_quasi_resonant_quartets(support_box, params, torus, budget)?;
        Self::from_quartets(support_box, Some(*params), *torus, &quartets)
    }

    /// Exact resonances only.
    pub fn exact_only(support_box: i64, torus: &TorusSpec, budget: u128) -> Result<Self> {
        let quartets = enumerate_exact_resonant_quartets(support_box, torus, budget)?;
        Self::from_quartets(support_box, None, *torus, &quartets)
    }

    /// From canonical quartets (`k1 ≤ k2`, `k3 ≤ k4`, closed under swapping
    /// the pairs), as produced by the enumerators.
    fn from_quartets(
        support_box: i64,
        params: Option<QuasiResonanceParams>,
        torus: TorusSpec,
        quartets: &[Quartet],
    ) -> Result<Self> {
        let omega_sq = torus.omega_sq();
        let mut entries = Vec::new();
        for q in quartets {
            let d = defect(q)?;
            let exact = is_defect_exact(&d, &torus);
            let theta = if exact { 0.0 } else { d.p as f64 + omega_sq * d.q as f64 };
            let (k1, k2, k3, k4) = (q.k1(), q.k2(), q.k3(), q.k4());
            let mut push = |k, a, b, c| {
                entries.push(TableEntry { k, k1: a, k2: b, k3: c, theta, exact });
            };
            push(k4, k1, k2, k3);
            if k1 != k2 {
                push(k4, k2, k1, k3);
            }
            if k3 != k4 {
                push(k3, k1, k2, k4);
                if k1 != k2 {
                    push(k3, k2, k1, k4);
                }
            }
        }
        entries.sort_by(|a, b| {
            (box_index(a.k, support_box), a.k1, a.k2, a.k3)
                .cmp(&(box_index(b.k, support_box), b.k1, b.k2, b.k3))
        });
        let side = (2 * support_box + 1) as usize;
        let mut offsets = vec![0; side * side + 1];
        for e in &entries {
            offsets[box_index(e.k, support_box) + 1] += 1;
        }
        for i in 0..side * side {
            offsets[i + 1] += offsets[i];
        }
        let idx = entries
            .iter()
            .map(|e| [e.k1, e.k2, e.k3].map(|k| box_index(k, support_box) as u32))
            .collect();
        Ok(Self {
            support_box,
            params,
            torus,
            entries,
            offsets,
            idx,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries feeding `k`.
    pub fn feeding(&self, k: ModeIndex) -> &[TableEntry] {
        if k.inf_norm() > self.support_box {
            return &[];
        }
        let i = box_index(k, self.support_box);
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Largest `|k_i|∞` over the non-exact entries; `0` if there are none.
    pub fn nonexact_extent(&self) -> i64 {
        self.entries
            .iter()
            .filter(|e| !e.exact)
            .flat_map(|e| [e.k, e.k1, e.k2, e.k3])
            .map(ModeIndex::inf_norm)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    pub fn sigma(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

/// Amplitudes on `|k|∞ ≤ support_box`, row-major with `m` outer.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState {
    pub z: Vec<Complex64>,
    pub support_box: i64,
    pub time: f64,
    pub sign: Sign,
}

impl TruncatedState {
    pub fn zeros(support_box: i64, sign: Sign) -> Self {
        let side = (2 * support_box + 1) as usize;
        Self {
            z: vec![ZERO; side * side],
            support_box,
            time: 0.0,
            sign,
        }
    }

    /// Uniform random amplitudes on `|k|∞ ≤ radius` (ChaCha8, row-major
    /// draws of real then imaginary part), scaled to `‖z‖_{ℓ²} = norm`.
    pub fn random(support_box: i64, radius: i64, norm: f64, seed: u64, sign: Sign) -> Result<Self> {
        if radius > support_box || radius < 0 {
            return Err(Error::InvalidParameter(format!(
                "data radius {radius} must lie in [0, {support_box}]"
            )));
        }
        let mut state = Self::zeros(support_box, sign);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in ModeIndex::square(radius) {
            let re = rng.gen_range(-1.0..1.0);
            let im = rng.gen_range(-1.0..1.0);
            state.set(k, Complex64::new(re, im))?;
        }
        let scale = norm / state.mass().sqrt();
        state.z.iter_mut().for_each(|c| *c *= scale);
        Ok(state)
    }

    pub fn get(&self, k: ModeIndex) -> Complex64 {
        if k.inf_norm() > self.support_box {
            return ZERO;
        }
        self.z[box_index(k, self.support_box)]
    }

    pub fn set(&mut self, k: ModeIndex, value: Complex64) -> Result<()> {
        if k.inf_norm() > self.support_box {
            return Err(Error::InvalidParameter(format!(
                "mode {k} is outside |k|∞ <= {}",
                self.support_box
            )));
        }
        self.z[box_index(k, self.support_box)] = value;
        Ok(())
    }

    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        ModeIndex::square(self.support_box).zip(self.z.iter().copied())
    }

    /// `‖z‖²_{ℓ²}`.
    pub fn mass(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_ℓ |z_{(m,ℓ)}|²` for every row `m`.
    pub fn row_masses(&self) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (k, c) in self.modes() {
            *out.entry(k.m).or_insert(0.0) += c.norm_sqr();
        }
        out
    }

    /// `Σ_m |z_{(m,ℓ)}|²` for every column `ℓ`.
    pub fn column_masses(&self) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (k, c) in self.modes() {
            *out.entry(k.l).or_insert(0.0) += c.norm_sqr();
        }
        out
    }

    /// Largest `|k|∞` carrying nonzero amplitude.
    pub fn support_radius(&self) -> i64 {
        self.modes()
            .filter(|(_, c)| *c != ZERO)
            .map(|(k, _)| k.inf_norm())
            .max()
            .unwrap_or(0)
    }
}

fn check_shapes(state: &TruncatedState, table: &QuartetTable) -> Result<()> {
    if state.support_box != table.support_box {
        return Err(Error::InvalidParameter(format!(
            "state box {} differs from table box {}",
            state.support_box, table.support_box
        )));
    }
    Ok(())
}

/// `Σ_e z₁z₂z̄₃ · phase(e)` per output mode, in table order.
fn cubic_sum(table: &QuartetTable, z: &[Complex64], phase: Option<&[Complex64]>, out: &mut [Complex64]) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let mut acc = ZERO;
        for e in table.offsets[i]..table.offsets[i + 1] {
            let [a, b, c] = table.idx[e];
            let mut t = z[a as usize] * z[b as usize] * z[c as usize].conj();
            if let Some(p) = phase {
                t *= p[e];
            }
            acc += t;
        }
        *o = acc;
    });
}

/// `ż = iλ_k z_k ± iΣ z₁z₂z̄₃`.
pub fn rhs(state: &TruncatedState, table: &QuartetTable) -> Result<Vec<Complex64>> {
    check_shapes(state, table)?;
    let mut out = vec![ZERO; state.z.len()];
    cubic_sum(table, &state.z, None, &mut out);
    let sigma = state.sign.sigma();
    for (o, (k, zk)) in out.iter_mut().zip(state.modes()) {
        *o = I * dispersion(k, &table.torus) * zk + I * sigma * *o;
    }
    Ok(out)
}

/// RK4 in the gauged variables `a_k = e^{−iλ_k τ} z_k` (τ local to the
/// step), whose right-hand side `iσ Σ a₁a₂ā₃ e^{iθτ}` keeps only the
/// quasi-resonant oscillation.
pub struct TruncatedStepper<'a> {
    table: &'a QuartetTable,
    dt: f64,
    phase_half: Vec<Complex64>,
    phase_full: Vec<Complex64>,
    linear: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl<'a> TruncatedStepper<'a> {
    pub fn new(table: &'a QuartetTable, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("time step must be nonzero, got {dt}")));
        }
        let n = table.offsets.len() - 1;
        let phase = |f: f64| -> Vec<Complex64> {
            table
                .entries
                .iter()
                .map(|e| Complex64::from_polar(1.0, e.theta * f * dt))
                .collect()
        };
        let linear = ModeIndex::square(table.support_box)
            .map(|k| Complex64::from_polar(1.0, dispersion(k, &table.torus) * dt))
            .collect();
        Ok(Self {
            table,
            dt,
            phase_half: phase(0.5),
            phase_full: phase(1.0),
            linear,
            k: std::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
        })
    }

    pub fn step(&mut self, state: &mut TruncatedState) -> Result<()> {
        check_shapes(state, self.table)?;
        let f = I * state.sign.sigma() * self.dt;
        let n = state.z.len();
        let a = &mut state.z;

        cubic_sum(self.table, a, None, &mut self.k[0]);
        self.k[0].iter_mut().for_each(|x| *x *= f);
        for i in 0..n {
            self.stage[i] = a[i] + 0.5 * self.k[0][i];
        }
        cubic_sum(self.table, &self.stage, Some(&self.phase_half), &mut self.k[1]);
        self.k[1].iter_mut().for_each(|x| *x *= f);
        for i in 0..n {
            self.stage[i] = a[i] + 0.5 * self.k[1][i];
        }
        cubic_sum(self.table, &self.stage, Some(&self.phase_half), &mut self.k[2]);
        self.k[2].iter_mut().for_each(|x| *x *= f);
        for i in 0..n {
            self.stage[i] = a[i] + self.k[2][i];
        }
        cubic_sum(self.table, &self.stage, Some(&self.phase_full), &mut self.k[3]);
        self.k[3].iter_mut().for_each(|x| *x *= f);
        let [k1, k2, k3, k4] = &self.k;
        for i in 0..n {
            a[i] = self.linear[i] * (a[i] + (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) / 6.0);
        }
        state.time += self.dt;
        if a.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { time: state.time });
        }
        Ok(())
    }
}

pub fn step_truncated(state: &mut TruncatedState, table: &QuartetTable, dt: f64) -> Result<()> {
    TruncatedStepper::new(table, dt)?.step(state)
}

/// Cut-off norm: `Σ_{|m|>M} w_k|z_k|² + Σ_{|ℓ|>M} w_k|z_k|²` with the split
/// weight `w_k = (1+m²)^s + (1+ℓ²)^s`. Modes beyond `M` in both components
/// count twice.
pub fn n_m_norm(state: &TruncatedState, m_cut: i64, s: SobolevIndex) -> f64 {
    state
        .modes()
        .map(|(k, c)| {
            let hits = (k.m.abs() > m_cut) as u8 + (k.l.abs() > m_cut) as u8;
            hits as f64 * split_weight(k, s) * c.norm_sqr()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedRecord {
    pub t: f64,
    pub mass: f64,
    pub n_m: Vec<f64>,
    pub rows: Vec<f64>,
    pub columns: Vec<f64>,
}

/// Time series of a truncated run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    pub s: f64,
    pub cutoffs: Vec<i64>,
    /// Row/column labels when the decoupled invariants were recorded.
    pub lines: Vec<i64>,
    pub records: Vec<TruncatedRecord>,
}

impl TruncatedSeries {
    /// `t,mass,N_<M>...` plus `row_<m>`/`col_<ℓ>` when recorded.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t,mass")?;
        for m in &self.cutoffs {
            write!(out, ",N_{m}")?;
        }
        for j in &self.lines {
            write!(out, ",row_{j}")?;
        }
        for j in &self.lines {
            write!(out, ",col_{j}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{:e},{:e}", r.t, r.mass)?;
            for x in r.n_m.iter().chain(&r.rows).chain(&r.columns) {
                write!(out, ",{x:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// `max_t |q(t) − q(0)| / scale`.
    pub fn max_drift(&self, q: impl Fn(&TruncatedRecord) -> f64, scale: f64) -> f64 {
        let Some(first) = self.records.first() else { return 0.0 };
        let q0 = q(first);
        self.records.iter().map(|r| (q(r) - q0).abs()).fold(0.0, f64::max) / scale
    }
}

/// Options of [`run_truncated`].
#[derive(Clone, Debug)]
pub struct TruncatedRun {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: u64,
    pub cutoffs: Vec<i64>,
    pub s: SobolevIndex,
    pub record_lines: bool,
}

fn record(state: &TruncatedState, run: &TruncatedRun) -> TruncatedRecord {
    let (rows, columns) = if run.record_lines {
        (
            state.row_masses().into_values().collect(),
            state.column_masses().into_values().collect(),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    TruncatedRecord {
        t: state.time,
        mass: state.mass(),
        n_m: run.cutoffs.iter().map(|&m| n_m_norm(state, m, run.s)).collect(),
        rows,
        columns,
    }
}

/// Integrates to `t_end` (a whole number of steps), sampling every
/// `sample_every` steps and at the end.
pub fn run_truncated(
    mut state: TruncatedState,
    table: &QuartetTable,
    run: &TruncatedRun,
) -> Result<(TruncatedSeries, TruncatedState)> {
    let steps = (run.t_end / run.dt).round();
    if !(run.dt > 0.0) || (steps * run.dt - run.t_end).abs() > 1e-9 * run.t_end.max(run.dt) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {} is not a multiple of dt = {}",
            run.t_end, run.dt
        )));
    }
    let every = run.sample_every.max(1);
    let steps = steps as u64;
    let mut stepper = TruncatedStepper::new(table, run.dt)?;
    let lines = if run.record_lines {
        (-table.support_box..=table.support_box).collect()
    } else {
        Vec::new()
    };
    let t0 = state.time;
    let mut records = vec![record(&state, run)];
    for n in 1..=steps {
        stepper.step(&mut state)?;
        state.time = t0 + n as f64 * run.dt;
        if n % every == 0 || n == steps {
            records.push(record(&state, run));
        }
    }
    let series = TruncatedSeries {
        s: run.s.value(),
        cutoffs: run.cutoffs.clone(),
        lines,
        records,
    };
    Ok((series, state))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmReport {
    pub cutoff: i64,
    pub data_radius: i64,
    pub table_extent: i64,
    pub initial_n_m: f64,
    /// `max_t |N_M(t) − N_M(0)| / max(N_M(0), ‖z₀‖²)`.
    pub relative_drift: f64,
    pub relative_mass_drift: f64,
    pub tolerance: f64,
    pub passes: bool,
}

/// Parameters of an N_M conservation check.
#[derive(Clone, Debug)]
pub struct NmCheck {
    pub cutoff: i64,
    pub data_radius: i64,
    pub norm: f64,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub s: SobolevIndex,
    pub sign: Sign,
    pub tolerance: f64,
}

/// Integrates random data supported in `|k|∞ ≤ data_radius` and measures
/// the drift of `N_M`. The cutoff must exceed both the data radius and the
/// table's non-exact extent; otherwise this is a precondition error.
pub fn verify_nm_conservation(table: &QuartetTable, check: &NmCheck) -> Result<NmReport> {
    let extent = table.nonexact_extent();
    if check.cutoff <= check.data_radius || check.cutoff <= extent {
        return Err(Error::Precondition(format!(
            "cutoff M = {} must exceed the data radius {} and the quartet extent {extent}",
            check.cutoff, check.data_radius
        )));
    }
    let state = TruncatedState::random(
        table.support_box,
        check.data_radius,
        check.norm,
        check.seed,
        check.sign,
    )?;
    let mass0 = state.mass();
    let run = TruncatedRun {
        t_end: check.t_end,
        dt: check.dt,
        sample_every: 1,
        cutoffs: vec![check.cutoff],
        s: check.s,
        record_lines: false,
    };
    let (series, _) = run_truncated(state, table, &run)?;
    let initial = series.records[0].n_m[0];
    let relative_drift = series.max_drift(|r| r.n_m[0], initial.max(mass0));
    Ok(NmReport {
        cutoff: check.cutoff,
        data_radius: check.data_radius,
        table_extent: extent,
        initial_n_m: initial,
        relative_drift,
        relative_mass_drift: series.max_drift(|r| r.mass, mass0),
        tolerance: check.tolerance,
        passes: relative_drift < check.tolerance,
    })
}
