//! Truncated partition-function series by dynamic programming over walks.
//!
//! For a fixed start `z0` the engines propagate, step by step, the sums
//!
//! ```text
//! G_k[v][m] = sum over walks z0 -> v of length k of  c(walk) h_m(a_walk) k! / (k+m)!
//! ```
//!
//! where `a_u = beta (E_top - E_u) >= 0`, `h_m` is the complete homogeneous
//! symmetric polynomial of the energies met so far and `c(walk)` is either
//! `prod(-d)` or `prod r`. Closing the walk at `z0` after `k` steps yields
//! `exp(-beta E_top) beta^k / k! * sum_m G_k[z0][m]`, the sum of
//! `prod(-d) |f[E..]|` over all closed configurations of order `k` that
//! start at `z0`. Walks are grouped by their geometric phase when the abs
//! weight is needed.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::scalar::{DpScalar, Wide};
use super::walk::{distances_to, step_table};
use crate::error::{Error, Result};
use crate::math::{cos, exp, ln, ln_factorial, round, sin, wrap_phase};
use crate::pmr::PmrForm;
use crate::signed_log::SignedLogValue;

/// Default cap on dynamic-programming cells or visited partial walks.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Phases closer than this share a class.
pub const PHASE_QUANTUM: f64 = 1e-9;

const MAX_ORDER: usize = 1 << 14;
const SERIES_EPS: f64 = 1e-17;
const CASCADE_LIMIT: f64 = 1e280;
/// Spreads `beta (E_max - E_min)` above this run in wide arithmetic.
const WIDE_SPREAD: f64 = 500.0;

/// Truncation and work limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    /// Target for `tail_bound / |Z|`.
    pub rel_tol: f64,
    /// Work cap; exceeding it is an error.
    pub budget: u64,
    /// Run to exactly this order instead of choosing one from `rel_tol`.
    pub fixed_order: Option<usize>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, budget: DEFAULT_BUDGET, fixed_order: None }
    }
}

impl SeriesOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn fixed(q_max: usize) -> Self {
        Self { fixed_order: Some(q_max), ..Self::default() }
    }
}

/// Runs a job for every start state; implementations may do so in
/// parallel but must return results in start order.
pub trait StartMap {
    fn map_starts<T: Send>(&self, n: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

/// Runs the jobs one after another.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl StartMap for Sequential {
    fn map_starts<T: Send>(&self, n: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..n).map(job).collect()
    }
}

/// Sums of the three weight families over all closed configurations of one
/// order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerSums {
    /// `sum Re prod(-d) |dd|`, i.e. `sum W`.
    pub z_true: SignedLogValue,
    /// `sum Im prod(-d) |dd|`; vanishes up to rounding.
    pub z_true_im: SignedLogValue,
    /// `sum W^(s)`.
    pub z_stoq: SignedLogValue,
    /// `sum W^(abs)`, available from the phase-resolved engine only.
    pub z_abs: Option<SignedLogValue>,
}

impl LayerSums {
    const ZERO: Self = Self {
        z_true: SignedLogValue::ZERO,
        z_true_im: SignedLogValue::ZERO,
        z_stoq: SignedLogValue::ZERO,
        z_abs: None,
    };

    fn add(&self, o: &Self) -> Self {
        Self {
            z_true: self.z_true + o.z_true,
            z_true_im: self.z_true_im + o.z_true_im,
            z_stoq: self.z_stoq + o.z_stoq,
            z_abs: match (self.z_abs, o.z_abs) {
                (Some(a), Some(b)) => Some(a + b),
                (a, b) => a.or(b),
            },
        }
    }
}

/// Outcome of [`partition_function_series`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSeries {
    pub beta: f64,
    /// `Z` as a float; infinite or zero if it leaves the `f64` range.
    pub z: f64,
    pub z_log: SignedLogValue,
    /// Imaginary remainder of the complex sum.
    pub z_im: SignedLogValue,
    /// Stoquasticized partition function over the same configurations.
    pub z_stoq: SignedLogValue,
    pub q_max: usize,
    pub tail_bound: f64,
    /// Contributions per order `0..=q_max`.
    pub layers: Vec<LayerSums>,
}

/// Outcome of [`weighted_signs`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSignReport {
    pub beta: f64,
    pub q_max: usize,
    pub z_true: SignedLogValue,
    pub z_stoq: SignedLogValue,
    pub z_abs: SignedLogValue,
    pub sgn_stoq: f64,
    pub sgn_abs: f64,
    pub tail_bound: f64,
}

/// Phase-resolved stoquastic weight of all order-`q` configurations whose
/// phase falls in one class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseClassSum {
    pub q: usize,
    pub phase: f64,
    pub stoq_sum: SignedLogValue,
}

struct Plan<'a> {
    pmr: &'a PmrForm,
    beta: f64,
    top: f64,
    a: Vec<f64>,
    spread: f64,
    m_cut: usize,
    q_max: usize,
    /// `(target, -d, r, phi)` per source state.
    steps: Vec<Vec<(usize, Complex64, f64, f64)>>,
    out: Vec<Vec<(usize, usize)>>,
    budget: u64,
}

impl<'a> Plan<'a> {
    fn new(pmr: &'a PmrForm, beta: f64, q_max: usize, budget: u64) -> Self {
        let top = pmr.classical_diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a: Vec<f64> = pmr.classical_diag.iter().map(|&e| beta * (top - e)).collect();
        let spread = a.iter().copied().fold(0.0, f64::max);
        let phases = step_table(pmr);
        let steps = (0..pmr.dim)
            .map(|v| {
                pmr.steps_from(v).zip(&phases[v]).map(|((_, w, d), &(_, _, _, phi))| (w, -d, d.norm(), phi)).collect()
            })
            .collect();
        Self { pmr, beta, top, a, spread, m_cut: series_cutoff(spread), q_max, steps, out: pmr.out_steps(), budget }
    }

    fn prefactor(&self, k: usize) -> f64 {
        k as f64 * ln(self.beta) - self.beta * self.top - ln_factorial(k)
    }

    /// `ln(a^m / m!)` for the start state, with its maximum.
    fn initial_logs(&self, z0: usize) -> (Vec<f64>, f64) {
        let a = self.a[z0];
        if a == 0.0 {
            let mut logs = vec![f64::NEG_INFINITY; self.m_cut + 1];
            logs[0] = 0.0;
            return (logs, 0.0);
        }
        let la = ln(a);
        let logs: Vec<f64> = (0..=self.m_cut).map(|m| m as f64 * la - ln_factorial(m)).collect();
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (logs, shift)
    }
}

/// Smallest `K` with `sum_{m > K} s^m / m! < SERIES_EPS e^s`.
fn series_cutoff(s: f64) -> usize {
    if s == 0.0 {
        return 0;
    }
    let ls = ln(s);
    let mut lt = ls; // ln s^1/1!
    let mut m = 1usize;
    loop {
        let r = s / (m + 1) as f64;
        if r < 1.0 && lt - ln(1.0 - r) - s < ln(SERIES_EPS) {
            return m - 1;
        }
        m += 1;
        lt += ls - ln(m as f64);
    }
}

/// `ln` of `N e^{-beta E_min} sum_{k > q} (beta R)^k / k!`, `R` the largest
/// off-diagonal absolute row sum.
fn ln_tail(pmr: &PmrForm, beta: f64, q: usize) -> f64 {
    let x = beta * pmr.max_offdiag_row_sum();
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let e_min = pmr.classical_diag.iter().copied().fold(f64::INFINITY, f64::min);
    let lx = ln(x);
    let k0 = q + 1;
    let first = k0 as f64 * lx - ln_factorial(k0);
    // sum_{j >= 0} of term_{k0 + j} / term_{k0}
    let mut rel = 1.0;
    let mut t = 1.0;
    let mut k = k0;
    loop {
        k += 1;
        t *= x / k as f64;
        rel += t;
        if (t < 1e-17 * rel && (k as f64) > x) || k > k0 + 100_000 {
            break;
        }
    }
    ln(pmr.dim as f64) - beta * e_min + first + ln(rel)
}

/// Rigorous bound on `sum_{k > q} |W|` over configurations of order above
/// `q`; it also bounds the stoquasticized and abs tails.
pub fn tail_bound(pmr: &PmrForm, beta: f64, q: usize) -> f64 {
    exp(ln_tail(pmr, beta, q))
}

/// Order whose tail falls below `rel_tol` times the lower bound
/// `sum_z exp(-beta H_zz)` on `Z`.
fn prior_order(pmr: &PmrForm, beta: f64, rel_tol: f64) -> usize {
    let e_min = pmr.classical_diag.iter().copied().fold(f64::INFINITY, f64::min);
    let rest: f64 = pmr.classical_diag.iter().map(|&e| exp(-beta * (e - e_min))).sum();
    let ln_lower = -beta * e_min + ln(rest);
    let target = ln(rel_tol) + ln_lower;
    let mut q = 0;
    while q < MAX_ORDER && ln_tail(pmr, beta, q) >= target {
        q += 1;
    }
    q
}

fn rescale<T: DpScalar>(values: &mut [T], log_scale: &mut f64) {
    if !T::RESCALES {
        return;
    }
    let biggest = values.iter().fold(0.0f64, |acc, v| acc.max(v.magnitude()));
    if biggest > 1e150 || (biggest > 0.0 && biggest < 1e-150) {
        let inv = 1.0 / biggest;
        for v in values.iter_mut() {
            *v = *v * inv;
        }
        *log_scale += ln(biggest);
    }
}

fn initial_row<T: DpScalar>(plan: &Plan<'_>, z0: usize) -> (Vec<T>, f64) {
    let (logs, shift) = plan.initial_logs(z0);
    (logs.into_iter().map(|l| if l == f64::NEG_INFINITY { T::ZERO } else { T::from_ln(l - shift) }).collect(), shift)
}

/// Complex and stoquastic sums for one start state.
fn run_complex<T: DpScalar>(plan: &Plan<'_>, z0: usize) -> Result<(Vec<LayerSums>, u64)> {
    let n = plan.pmr.dim;
    let kk = plan.m_cut + 1;
    let dist = distances_to(&plan.out, z0);
    // interleaved storage: [re, im, stoq] per (v, m)
    let mut cur = vec![T::ZERO; n * kk * 3];
    let mut active = vec![false; n];
    let (row, mut log_scale) = initial_row::<T>(plan, z0);
    for (m, g) in row.into_iter().enumerate() {
        let base = (z0 * kk + m) * 3;
        cur[base] = g;
        cur[base + 2] = g;
    }
    active[z0] = true;
    rescale(&mut cur, &mut log_scale);
    let mut cells = 0u64;
    let mut layers = Vec::with_capacity(plan.q_max + 1);
    layers.push(close_complex(plan, &cur, z0, kk, 0, log_scale));

    let mut next = vec![T::ZERO; n * kk * 3];
    let mut next_active = vec![false; n];
    for k in 1..=plan.q_max {
        let remaining = (plan.q_max - k) as u32;
        next.iter_mut().for_each(|x| *x = T::ZERO);
        next_active.iter_mut().for_each(|x| *x = false);
        let fk: Vec<f64> = (0..kk).map(|m| k as f64 / (k + m) as f64).collect();
        for v in (0..n).filter(|&v| active[v]) {
            for &(w, md, r, _) in &plan.steps[v] {
                if dist[w] > remaining {
                    continue;
                }
                next_active[w] = true;
                cells += kk as u64;
                let (src, dst) = (v * kk * 3, w * kk * 3);
                for (m, &f) in fk.iter().enumerate().take(kk) {
                    let s = src + 3 * m;
                    let (re, im, st) = (cur[s], cur[s + 1], cur[s + 2]);
                    let d = dst + 3 * m;
                    next[d] = next[d] + (re * (f * md.re) - im * (f * md.im));
                    next[d + 1] = next[d + 1] + (im * (f * md.re) + re * (f * md.im));
                    next[d + 2] = next[d + 2] + st * (f * r);
                }
            }
        }
        let mut shift = 0.0;
        for w in (0..n).filter(|&w| next_active[w]) {
            let aw = plan.a[w];
            let base = w * kk * 3;
            for m in 1..kk {
                let g = aw / (k + m) as f64;
                let (p, c) = (base + 3 * (m - 1), base + 3 * m);
                next[c] = next[c] + next[p] * g;
                next[c + 1] = next[c + 1] + next[p + 1] * g;
                next[c + 2] = next[c + 2] + next[p + 2] * g;
                if T::RESCALES && next[c + 2].magnitude() > CASCADE_LIMIT {
                    next.iter_mut().for_each(|x| *x = *x * (1.0 / CASCADE_LIMIT));
                    shift += ln(CASCADE_LIMIT);
                }
            }
        }
        if cells > plan.budget {
            return Err(Error::BudgetExceeded { cap: plan.budget });
        }
        core::mem::swap(&mut cur, &mut next);
        core::mem::swap(&mut active, &mut next_active);
        log_scale += shift;
        rescale(&mut cur, &mut log_scale);
        layers.push(close_complex(plan, &cur, z0, kk, k, log_scale));
    }
    Ok((layers, cells))
}

fn close_complex<T: DpScalar>(plan: &Plan<'_>, cur: &[T], z0: usize, kk: usize, k: usize, log_scale: f64) -> LayerSums {
    let (mut re, mut im, mut st) = (T::ZERO, T::ZERO, T::ZERO);
    for m in 0..kk {
        let b = (z0 * kk + m) * 3;
        re = re + cur[b];
        im = im + cur[b + 1];
        st = st + cur[b + 2];
    }
    let shift = SignedLogValue::from_ln(plan.prefactor(k) + log_scale);
    LayerSums {
        z_true: re.to_signed_log() * shift,
        z_true_im: im.to_signed_log() * shift,
        z_stoq: st.to_signed_log() * shift,
        z_abs: None,
    }
}

struct PhaseClass<T> {
    phase: f64,
    rows: BTreeMap<usize, Vec<T>>,
}

fn phase_key(phase: f64) -> i64 {
    round(phase / PHASE_QUANTUM) as i64
}

/// Phase-resolved stoquastic sums for one start state: per order, the list
/// of `(class key, phase, sum)`.
type ClassLayers = Vec<Vec<(i64, f64, SignedLogValue)>>;

fn run_classes<T: DpScalar>(plan: &Plan<'_>, z0: usize) -> Result<(ClassLayers, u64)> {
    let kk = plan.m_cut + 1;
    let dist = distances_to(&plan.out, z0);
    let mut layer: BTreeMap<i64, PhaseClass<T>> = BTreeMap::new();
    let mut rows = BTreeMap::new();
    let (row, mut log_scale) = initial_row::<T>(plan, z0);
    rows.insert(z0, row);
    layer.insert(0, PhaseClass { phase: 0.0, rows });
    rescale_classes(&mut layer, &mut log_scale);
    let mut cells = 0u64;
    let mut out = Vec::with_capacity(plan.q_max + 1);
    out.push(close_classes(plan, &layer, z0, 0, log_scale));

    for k in 1..=plan.q_max {
        let remaining = (plan.q_max - k) as u32;
        let fk: Vec<f64> = (0..kk).map(|m| k as f64 / (k + m) as f64).collect();
        let mut next: BTreeMap<i64, PhaseClass<T>> = BTreeMap::new();
        for class in layer.values() {
            for (&v, row) in &class.rows {
                for &(w, _, r, phi) in &plan.steps[v] {
                    if dist[w] > remaining {
                        continue;
                    }
                    cells += kk as u64;
                    let phase = wrap_phase(class.phase + phi);
                    let target =
                        next.entry(phase_key(phase)).or_insert_with(|| PhaseClass { phase, rows: BTreeMap::new() });
                    let dst = target.rows.entry(w).or_insert_with(|| vec![T::ZERO; kk]);
                    for m in 0..kk {
                        dst[m] = dst[m] + row[m] * (fk[m] * r);
                    }
                }
            }
            if cells > plan.budget {
                return Err(Error::BudgetExceeded { cap: plan.budget });
            }
        }
        let keys: Vec<(i64, usize)> = next.iter().flat_map(|(&key, c)| c.rows.keys().map(move |&w| (key, w))).collect();
        for (key, w) in keys {
            let aw = plan.a[w];
            let mut row = core::mem::take(next.get_mut(&key).unwrap().rows.get_mut(&w).unwrap());
            for m in 1..kk {
                row[m] = row[m] + row[m - 1] * (aw / (k + m) as f64);
                if T::RESCALES && row[m].magnitude() > CASCADE_LIMIT {
                    row.iter_mut().for_each(|x| *x = *x * (1.0 / CASCADE_LIMIT));
                    for c in next.values_mut() {
                        for r in c.rows.values_mut() {
                            r.iter_mut().for_each(|x| *x = *x * (1.0 / CASCADE_LIMIT));
                        }
                    }
                    log_scale += ln(CASCADE_LIMIT);
                }
            }
            *next.get_mut(&key).unwrap().rows.get_mut(&w).unwrap() = row;
        }
        layer = next;
        rescale_classes(&mut layer, &mut log_scale);
        out.push(close_classes(plan, &layer, z0, k, log_scale));
    }
    Ok((out, cells))
}

fn rescale_classes<T: DpScalar>(layer: &mut BTreeMap<i64, PhaseClass<T>>, log_scale: &mut f64) {
    if !T::RESCALES {
        return;
    }
    let biggest = layer
        .values()
        .flat_map(|c| c.rows.values())
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.magnitude()));
    if biggest > 1e150 || (biggest > 0.0 && biggest < 1e-150) {
        let inv = 1.0 / biggest;
        for c in layer.values_mut() {
            for r in c.rows.values_mut() {
                r.iter_mut().for_each(|v| *v = *v * inv);
            }
        }
        *log_scale += ln(biggest);
    }
}

fn close_classes<T: DpScalar>(
    plan: &Plan<'_>,
    layer: &BTreeMap<i64, PhaseClass<T>>,
    z0: usize,
    k: usize,
    log_scale: f64,
) -> Vec<(i64, f64, SignedLogValue)> {
    let shift = SignedLogValue::from_ln(plan.prefactor(k) + log_scale);
    layer
        .iter()
        .filter_map(|(&key, c)| {
            let s = c.rows.get(&z0)?.iter().fold(T::ZERO, |acc, &x| acc + x).to_signed_log();
            (s.sign > 0).then(|| (key, c.phase, s * shift))
        })
        .collect()
}

/// Per-start engines, in plain or wide arithmetic depending on the spread.
fn run_start(plan: &Plan<'_>, z0: usize, with_phases: bool) -> Result<(Vec<LayerSums>, u64)> {
    let wide = plan.spread > WIDE_SPREAD;
    if with_phases {
        let (cl, cells) = if wide { run_classes::<Wide>(plan, z0)? } else { run_classes::<f64>(plan, z0)? };
        Ok((cl.iter().map(|c| class_layer_sums(c)).collect(), cells))
    } else if wide {
        run_complex::<Wide>(plan, z0)
    } else {
        run_complex::<f64>(plan, z0)
    }
}

fn class_layer_sums(classes: &[(i64, f64, SignedLogValue)]) -> LayerSums {
    let mut sums = LayerSums { z_abs: Some(SignedLogValue::ZERO), ..LayerSums::ZERO };
    for &(_, phase, s) in classes {
        let c = cos(phase);
        sums.z_true = sums.z_true + SignedLogValue::from_f64(c) * s;
        // prod(-d) = prod r e^{-i Phi}
        sums.z_true_im = sums.z_true_im + SignedLogValue::from_f64(-sin(phase)) * s;
        sums.z_stoq = sums.z_stoq + s;
        sums.z_abs = Some(sums.z_abs.unwrap() + SignedLogValue::from_f64(c.abs()) * s);
    }
    sums
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(alloc::format!("beta must be positive and finite, got {beta}")))
    }
}

fn check_tol(opts: &SeriesOptions) -> Result<()> {
    if opts.fixed_order.is_none() && !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::InvalidInput(alloc::format!("rel_tol must lie in (0, 1), got {}", opts.rel_tol)));
    }
    Ok(())
}

/// Sums per-start layers in start order and checks the total work.
fn reduce<M: StartMap>(
    pmr: &PmrForm,
    beta: f64,
    q_max: usize,
    budget: u64,
    map: &M,
    with_phases: bool,
) -> Result<Vec<LayerSums>> {
    let plan = Plan::new(pmr, beta, q_max, budget);
    let per_start: Vec<Result<(Vec<LayerSums>, u64)>> =
        map.map_starts(pmr.dim, &|z0| run_start(&plan, z0, with_phases));
    let mut total = vec![LayerSums::ZERO; q_max + 1];
    let mut cells = 0u64;
    for r in per_start {
        let (layers, c) = r?;
        cells = cells.saturating_add(c);
        for (t, l) in total.iter_mut().zip(&layers) {
            *t = t.add(l);
        }
    }
    if cells > budget {
        return Err(Error::BudgetExceeded { cap: budget });
    }
    Ok(total)
}

/// Chooses the order, runs the engine and trims to the smallest order whose
/// tail bound is below `rel_tol |Z_q|`.
fn truncated<M: StartMap>(
    pmr: &PmrForm,
    beta: f64,
    opts: &SeriesOptions,
    map: &M,
    with_phases: bool,
) -> Result<(Vec<LayerSums>, usize)> {
    check_beta(beta)?;
    check_tol(opts)?;
    if let Some(q) = opts.fixed_order {
        let layers = reduce(pmr, beta, q, opts.budget, map, with_phases)?;
        return Ok((layers, q));
    }
    let mut q_run = prior_order(pmr, beta, opts.rel_tol);
    loop {
        let layers = reduce(pmr, beta, q_run, opts.budget, map, with_phases)?;
        let mut partial = SignedLogValue::ZERO;
        for (q, l) in layers.iter().enumerate() {
            partial = partial + l.z_true;
            if !partial.is_zero() && ln_tail(pmr, beta, q) < ln(opts.rel_tol) + partial.log_mag {
                let mut kept = layers;
                kept.truncate(q + 1);
                return Ok((kept, q));
            }
        }
        if q_run >= MAX_ORDER {
            return Err(Error::BudgetExceeded { cap: opts.budget });
        }
        q_run = (2 * q_run + 1).min(MAX_ORDER);
    }
}

/// `Z = tr exp(-beta H)` from the permutation-matrix series, truncated by
/// the tail bound.
pub fn partition_function_series(pmr: &PmrForm, beta: f64, rel_tol: f64) -> Result<PartitionSeries> {
    partition_function_series_with(pmr, beta, &SeriesOptions::with_rel_tol(rel_tol), &Sequential)
}

pub fn partition_function_series_with<M: StartMap>(
    pmr: &PmrForm,
    beta: f64,
    opts: &SeriesOptions,
    map: &M,
) -> Result<PartitionSeries> {
    let (layers, q_max) = truncated(pmr, beta, opts, map, false)?;
    let sum = layers.iter().fold(LayerSums::ZERO, |a, l| a.add(l));
    Ok(PartitionSeries {
        beta,
        z: sum.z_true.to_f64(),
        z_log: sum.z_true,
        z_im: sum.z_true_im,
        z_stoq: sum.z_stoq,
        q_max,
        tail_bound: tail_bound(pmr, beta, q_max),
        layers,
    })
}

/// Weighted signs of the stoquasticized and abs schemes over one truncated
/// configuration set.
pub fn weighted_signs(pmr: &PmrForm, beta: f64, rel_tol: f64) -> Result<WeightedSignReport> {
    weighted_signs_with(pmr, beta, &SeriesOptions::with_rel_tol(rel_tol), &Sequential)
}

pub fn weighted_signs_with<M: StartMap>(
    pmr: &PmrForm,
    beta: f64,
    opts: &SeriesOptions,
    map: &M,
) -> Result<WeightedSignReport> {
    let (layers, q_max) = truncated(pmr, beta, opts, map, true)?;
    let sum = layers.iter().fold(LayerSums::ZERO, |a, l| a.add(l));
    let z_abs = sum.z_abs.unwrap_or(SignedLogValue::ZERO);
    Ok(WeightedSignReport {
        beta,
        q_max,
        z_true: sum.z_true,
        z_stoq: sum.z_stoq,
        z_abs,
        sgn_stoq: sum.z_true.div(&sum.z_stoq).to_f64(),
        sgn_abs: sum.z_true.div(&z_abs).to_f64(),
        tail_bound: tail_bound(pmr, beta, q_max),
    })
}

/// `(beta, sgn_stoq, sgn_abs)` for each inverse temperature.
pub fn sign_decay_scan(pmr: &PmrForm, betas: &[f64], rel_tol: f64) -> Result<Vec<(f64, f64, f64)>> {
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("inverse temperatures must be strictly ascending".into()));
    }
    betas.iter().map(|&b| weighted_signs(pmr, b, rel_tol).map(|r| (b, r.sgn_stoq, r.sgn_abs))).collect()
}

/// Stoquastic weight of every phase class at every order up to `q_max`,
/// summed over start states and sorted by `(q, phase)`.
pub fn phase_census(pmr: &PmrForm, beta: f64, q_max: usize, budget: u64) -> Result<Vec<PhaseClassSum>> {
    check_beta(beta)?;
    let plan = Plan::new(pmr, beta, q_max, budget);
    let mut merged: BTreeMap<(usize, i64), (f64, SignedLogValue)> = BTreeMap::new();
    let mut cells = 0u64;
    for z0 in 0..pmr.dim {
        let (layers, c) =
            if plan.spread > WIDE_SPREAD { run_classes::<Wide>(&plan, z0)? } else { run_classes::<f64>(&plan, z0)? };
        cells = cells.saturating_add(c);
        if cells > budget {
            return Err(Error::BudgetExceeded { cap: budget });
        }
        for (q, classes) in layers.into_iter().enumerate() {
            for (key, phase, s) in classes {
                let e = merged.entry((q, key)).or_insert((phase, SignedLogValue::ZERO));
                e.1 = e.1 + s;
            }
        }
    }
    Ok(merged.into_iter().map(|((q, _), (phase, stoq_sum))| PhaseClassSum { q, phase, stoq_sum }).collect())
}
