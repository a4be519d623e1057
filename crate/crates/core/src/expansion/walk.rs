//! Depth-first enumeration of closed walks.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::{assemble, phase_of_coeff, Configuration, WeightBreakdown};
use crate::error::{Error, Result};
use crate::math::{cos, ln, wrap_phase};
use crate::pmr::PmrForm;

/// A closed walk handed to the visitor of [`visit_closed_walks`].
#[derive(Debug)]
pub struct ClosedWalk<'a> {
    pub z: usize,
    pub seq: &'a [usize],
    pub states: &'a [usize],
    /// `ln prod r`.
    pub ln_r: f64,
    /// Unreduced phase sum.
    pub phase: f64,
}

impl ClosedWalk<'_> {
    pub fn config(&self) -> Configuration {
        Configuration::new(self.z, self.seq.to_vec())
    }
}

#[derive(Clone, Copy)]
struct Step {
    term: usize,
    target: usize,
    ln_r: f64,
    phi: f64,
}

pub(crate) fn step_table(pmr: &PmrForm) -> Vec<Vec<(usize, usize, f64, f64)>> {
    (0..pmr.dim).map(|v| pmr.steps_from(v).map(|(j, w, d)| (j, w, ln(d.norm()), phase_of_coeff(d))).collect()).collect()
}

/// Hop distance from every vertex to `target` on the walk graph.
pub(crate) fn distances_to(out: &[Vec<(usize, usize)>], target: usize) -> Vec<u32> {
    // the support of a Hermitian matrix is symmetric, so forward BFS suffices
    let mut dist = vec![u32::MAX; out.len()];
    let mut queue = VecDeque::new();
    dist[target] = 0;
    queue.push_back(target);
    while let Some(v) = queue.pop_front() {
        for &(_, w) in &out[v] {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

struct Dfs<'a, F> {
    steps: &'a [Vec<Step>],
    dist: &'a [u32],
    z: usize,
    q: usize,
    seq: Vec<usize>,
    states: Vec<usize>,
    visited: u64,
    budget: u64,
    visit: &'a mut F,
}

impl<F> Dfs<'_, F>
where
    F: FnMut(&ClosedWalk<'_>) -> ControlFlow<()>,
{
    fn run(&mut self, v: usize, ln_r: f64, phase: f64) -> Result<ControlFlow<()>> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded { cap: self.budget });
        }
        let depth = self.seq.len();
        if depth == self.q {
            if v == self.z {
                let walk = ClosedWalk { z: self.z, seq: &self.seq, states: &self.states, ln_r, phase };
                return Ok((self.visit)(&walk));
            }
            return Ok(ControlFlow::Continue(()));
        }
        let remaining = (self.q - depth - 1) as u32;
        for idx in 0..self.steps[v].len() {
            let s = self.steps[v][idx];
            if self.dist[s.target] > remaining {
                continue;
            }
            self.seq.push(s.term);
            self.states.push(s.target);
            let flow = self.run(s.target, ln_r + s.ln_r, phase + s.phi)?;
            self.seq.pop();
            self.states.pop();
            if flow.is_break() {
                return Ok(flow);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// Visits every closed configuration with `q <= q_max` in `(q, z, seq)`
/// lexicographic order. Fails once more than `budget` partial walks have
/// been expanded. The visitor may stop the enumeration early.
pub fn visit_closed_walks<F>(pmr: &PmrForm, q_max: usize, budget: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&ClosedWalk<'_>) -> ControlFlow<()>,
{
    let table: Vec<Vec<Step>> = step_table(pmr)
        .into_iter()
        .map(|row| row.into_iter().map(|(term, target, ln_r, phi)| Step { term, target, ln_r, phi }).collect())
        .collect();
    let out = pmr.out_steps();
    let mut dists: Vec<Option<Vec<u32>>> = vec![None; pmr.dim];
    let mut visited = 0u64;
    for q in 0..=q_max {
        for (z, slot) in dists.iter_mut().enumerate() {
            let dist = slot.get_or_insert_with(|| distances_to(&out, z));
            let mut dfs = Dfs {
                steps: &table,
                dist,
                z,
                q,
                seq: Vec::with_capacity(q),
                states: vec![z],
                visited,
                budget,
                visit: &mut visit,
            };
            let flow = dfs.run(z, 0.0, 0.0)?;
            visited = dfs.visited;
            if flow.is_break() {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// All closed configurations with `q <= q_max`, ordered by `(q, z, seq)`.
pub fn enumerate_configs(pmr: &PmrForm, q_max: usize) -> Result<Vec<Configuration>> {
    let mut out = Vec::new();
    visit_closed_walks(pmr, q_max, super::DEFAULT_BUDGET, |w| {
        out.push(w.config());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// First configuration (in enumeration order) whose true weight lies below
/// `-threshold`. The divided difference is only evaluated for walks with a
/// negative cosine.
pub fn find_negative_weight(
    pmr: &PmrForm,
    beta: f64,
    q_max: usize,
    threshold: f64,
    budget: u64,
) -> Result<Option<(Configuration, WeightBreakdown)>> {
    let mut found = None;
    visit_closed_walks(pmr, q_max, budget, |w| {
        let phase = wrap_phase(w.phase);
        if cos(phase) < 0.0 {
            let energies = w.states.iter().map(|&s| pmr.classical_diag[s]).collect();
            let wb = assemble(w.states.to_vec(), energies, beta, w.ln_r, phase);
            if wb.w_true < -threshold {
                found = Some((w.config(), wb));
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(found)
}
