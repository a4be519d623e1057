//! Metropolis-Hastings sampling of closed configurations.
//!
//! The chain state is a closed walk. Moves insert or delete a *loop* (a
//! backtrack `v -> w -> v` or a chordless cycle through `v`, in either
//! direction), rotate the walk cyclically, or move the whole term sequence
//! to another start state on which it is also closed. Each move is accepted
//! with the Hastings ratio for the sampling weight.
//!
//! Under the stoquastic scheme the chain samples `W^(s)` directly. Under
//! the abs scheme it samples `W^(s) max(|cos Phi|, ABS_COS_FLOOR)` so that
//! walks with a vanishing cosine do not disconnect the state space, and
//! every visit is reweighted by `|cos Phi| / max(|cos Phi|, ABS_COS_FLOOR)`.
//! Away from the floor the two distributions coincide.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::divdiff::ln_abs_divdiff;
use crate::error::{Error, Result};
use crate::expansion::{config_weight, enumerate_configs, Configuration};
use crate::math::{cos, exp, ln, sqrt, wrap_phase};
use crate::phase_graph::PhaseGraph;
use crate::pmr::{recompose, PmrForm};

const P_INSERT: f64 = 0.3;
const P_DELETE: f64 = 0.3;
const P_ROTATE: f64 = 0.2;

/// Walks longer than this abort the chain.
pub const Q_SAFETY: usize = 10_000;
/// Floor on `|cos Phi|` in the abs-scheme sampling weight.
pub const ABS_COS_FLOOR: f64 = 0.1;
/// Number of batches used for the standard error.
pub const BATCHES: usize = 32;
/// Longest chordless cycle used as a loop move.
pub const LOOP_MAX_LEN: usize = 12;
/// Cap on the number of chordless cycles used as loop moves.
pub const LOOP_MAX_COUNT: usize = 100_000;
/// Largest truncated configuration space [`exact_chain_check`] accepts.
pub const EXACT_CHECK_MAX_STATES: usize = 100_000;

/// Sampling weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// `W^(s) = prod r |dd|`.
    Stoq,
    /// `W^(abs) = |cos Phi| prod r |dd|`.
    Abs,
}

/// Estimate of a weighted sign from one or more chains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignEstimate {
    pub scheme: Scheme,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub acceptance_rate: f64,
}

struct Loops {
    /// Loops at each vertex, as term sequences, sorted.
    at: Vec<Vec<Vec<usize>>>,
}

impl Loops {
    fn build(pmr: &PmrForm) -> Self {
        let n = pmr.dim;
        let mut term_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (j, t) in pmr.terms.iter().enumerate() {
            for (v, w) in t.perm.iter().enumerate() {
                if let Some(w) = *w {
                    term_of.insert((v, w), j);
                }
            }
        }
        let mut at: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
        for (&(v, w), &j) in &term_of {
            at[v].push(vec![j, term_of[&(w, v)]]);
        }
        let graph = PhaseGraph::build(&recompose(pmr), 0.0);
        let (cycles, _) = graph.chordless_cycles(LOOP_MAX_LEN, LOOP_MAX_COUNT);
        for cyc in cycles {
            let k = cyc.vertices.len();
            for dir in [false, true] {
                let mut verts = cyc.vertices.clone();
                if dir {
                    verts.reverse();
                }
                for s in 0..k {
                    let seq: Vec<usize> =
                        (0..k).map(|i| term_of[&(verts[(s + i) % k], verts[(s + i + 1) % k])]).collect();
                    at[verts[s]].push(seq);
                }
            }
        }
        for l in &mut at {
            l.sort();
            l.dedup();
        }
        Self { at }
    }

    fn contains(&self, v: usize, seq: &[usize]) -> bool {
        self.at[v].binary_search_by(|l| l.as_slice().cmp(seq)).is_ok()
    }

    fn matches_at<'s>(&'s self, v: usize, seq: &'s [usize], p: usize) -> impl Iterator<Item = &'s Vec<usize>> + 's {
        self.at[v].iter().filter(move |l| seq.len() >= p + l.len() && seq[p..p + l.len()] == l[..])
    }
}

#[derive(Clone, Debug)]
struct Walk {
    seq: Vec<usize>,
    states: Vec<usize>,
    ln_pi: f64,
    ratio: f64,
    /// `W / pi` and `W^(scheme) / pi` for the sampling weight `pi`.
    num: f64,
    den: f64,
}

/// A Metropolis-Hastings chain over closed configurations.
pub struct Chain<'a> {
    pmr: &'a PmrForm,
    beta: f64,
    scheme: Scheme,
    q_cap: usize,
    loops: Loops,
    rng: ChaCha8Rng,
    cur: Walk,
    accepted: u64,
    proposed: u64,
}

impl<'a> Chain<'a> {
    /// Starts from the empty walk at state 0. Walks longer than `q_cap`
    /// (if given) are never proposed successfully.
    pub fn new(pmr: &'a PmrForm, beta: f64, scheme: Scheme, q_cap: Option<usize>, seed: u64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive and finite, got {beta}")));
        }
        let mut chain = Self {
            pmr,
            beta,
            scheme,
            q_cap: q_cap.unwrap_or(Q_SAFETY),
            loops: Loops::build(pmr),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cur: Walk { seq: Vec::new(), states: vec![0], ln_pi: 0.0, ratio: 1.0, num: 1.0, den: 1.0 },
            accepted: 0,
            proposed: 0,
        };
        chain.cur = chain.evaluate(Vec::new(), vec![0]);
        Ok(chain)
    }

    pub fn config(&self) -> Configuration {
        Configuration::new(self.cur.states[0], self.cur.seq.clone())
    }

    /// `W / W^(scheme)` at the current state, in `[-1, 1]`.
    pub fn ratio(&self) -> f64 {
        self.cur.ratio
    }

    /// Importance weight `W^(scheme) / pi` of the current state under the
    /// sampling weight `pi`; identically 1 for the stoquastic scheme.
    pub fn reweight(&self) -> f64 {
        self.cur.den
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn evaluate(&self, seq: Vec<usize>, states: Vec<usize>) -> Walk {
        let mut ln_r = 0.0;
        let mut phase = 0.0;
        for (k, &t) in seq.iter().enumerate() {
            let d = self.pmr.terms[t].diag[states[k + 1]];
            ln_r += ln(d.norm());
            phase += crate::expansion::phase_of_coeff(d);
        }
        let energies: Vec<f64> = states.iter().map(|&s| self.pmr.classical_diag[s]).collect();
        let ln_w = ln_r + ln_abs_divdiff(self.beta, &energies);
        let c = cos(wrap_phase(phase));
        let (ln_pi, ratio, num, den) = match self.scheme {
            Scheme::Stoq => (ln_w, c, c, 1.0),
            Scheme::Abs => {
                let sign = if c > 0.0 {
                    1.0
                } else if c < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let floor = c.abs().max(ABS_COS_FLOOR);
                (ln_w + ln(floor), sign, c / floor, c.abs() / floor)
            }
        };
        Walk { seq, states, ln_pi, ratio, num, den }
    }

    fn accept(&mut self, next: Walk, ln_hastings: f64) -> bool {
        let ln_a = next.ln_pi - self.cur.ln_pi + ln_hastings;
        let ok = ln_a >= 0.0 || self.rng.random::<f64>() < exp(ln_a);
        if ok {
            self.cur = next;
            self.accepted += 1;
        }
        ok
    }

    /// Insertion positions `p` in `short` for which inserting the segment
    /// `long[p..p+len]` (a loop at `short.states[p]`) produces `long`.
    fn insertion_sites(&self, short: &Walk, long: &Walk) -> Vec<usize> {
        let qa = short.seq.len();
        let len = long.seq.len() - qa;
        let lcp = short.seq.iter().zip(&long.seq).take_while(|(a, b)| a == b).count();
        let lcs = short.seq.iter().rev().zip(long.seq.iter().rev()).take_while(|(a, b)| a == b).count();
        let lo = qa.saturating_sub(lcs);
        let hi = lcp.min(qa);
        (lo..=hi).filter(|&p| self.loops.contains(short.states[p], &long.seq[p..p + len])).collect()
    }

    /// `ln [P(long -> short) / P(short -> long)]` under delete/insert moves.
    fn ln_delete_over_insert(&self, short: &Walk, long: &Walk) -> f64 {
        let sites = self.insertion_sites(short, long);
        let (qa, qb) = (short.seq.len() as f64, long.seq.len() as f64);
        let ins: f64 = sites.iter().map(|&p| 1.0 / self.loops.at[short.states[p]].len() as f64).sum::<f64>() * P_INSERT
            / (qa + 1.0);
        let del: f64 = sites
            .iter()
            .map(|&p| 1.0 / self.loops.matches_at(long.states[p], &long.seq, p).count() as f64)
            .sum::<f64>()
            * P_DELETE
            / (qb + 1.0);
        ln(del) - ln(ins)
    }

    fn states_of(&self, z: usize, seq: &[usize]) -> Option<Vec<usize>> {
        let mut states = Vec::with_capacity(seq.len() + 1);
        let mut v = z;
        states.push(v);
        for &t in seq {
            v = self.pmr.terms[t].image(v)?;
            states.push(v);
        }
        (v == z).then_some(states)
    }

    /// Proposes one move and applies the Metropolis-Hastings test. Returns
    /// whether the chain moved.
    pub fn step(&mut self) -> Result<bool> {
        self.proposed += 1;
        let u: f64 = self.rng.random();
        let q = self.cur.seq.len();
        if u < P_INSERT {
            let p = self.rng.random_range(0..=q);
            let v = self.cur.states[p];
            let n_loops = self.loops.at[v].len();
            if n_loops == 0 {
                return Ok(false);
            }
            let lp = self.loops.at[v][self.rng.random_range(0..n_loops)].clone();
            let new_q = q + lp.len();
            if new_q > self.q_cap {
                if self.q_cap >= Q_SAFETY {
                    return Err(Error::ZeroWeightTrap(format!("walk length exceeded {Q_SAFETY}")));
                }
                return Ok(false);
            }
            let mut seq = Vec::with_capacity(new_q);
            seq.extend_from_slice(&self.cur.seq[..p]);
            seq.extend_from_slice(&lp);
            seq.extend_from_slice(&self.cur.seq[p..]);
            let states = self.states_of(self.cur.states[0], &seq).expect("loop insertion keeps the walk closed");
            let next = self.evaluate(seq, states);
            let h = self.ln_delete_over_insert(&self.cur, &next);
            Ok(self.accept(next, h))
        } else if u < P_INSERT + P_DELETE {
            let p = self.rng.random_range(0..=q);
            let v = self.cur.states[p];
            let matches: Vec<&Vec<usize>> = self.loops.matches_at(v, &self.cur.seq, p).collect();
            if matches.is_empty() {
                return Ok(false);
            }
            let len = matches[self.rng.random_range(0..matches.len())].len();
            let mut seq = Vec::with_capacity(q - len);
            seq.extend_from_slice(&self.cur.seq[..p]);
            seq.extend_from_slice(&self.cur.seq[p + len..]);
            let states = self.states_of(self.cur.states[0], &seq).expect("loop deletion keeps the walk closed");
            let next = self.evaluate(seq, states);
            let h = -self.ln_delete_over_insert(&next, &self.cur);
            Ok(self.accept(next, h))
        } else if u < P_INSERT + P_DELETE + P_ROTATE {
            if q < 2 {
                return Ok(false);
            }
            let s = self.rng.random_range(1..q);
            let mut seq = self.cur.seq.clone();
            seq.rotate_left(s);
            let states = self.states_of(self.cur.states[s], &seq).expect("rotation keeps the walk closed");
            let next = self.evaluate(seq, states);
            Ok(self.accept(next, 0.0))
        } else {
            let closed: Vec<usize> =
                (0..self.pmr.dim).filter(|&z| self.states_of(z, &self.cur.seq).is_some()).collect();
            let z = closed[self.rng.random_range(0..closed.len())];
            if z == self.cur.states[0] {
                return Ok(false);
            }
            let states = self.states_of(z, &self.cur.seq).unwrap();
            let next = self.evaluate(self.cur.seq.clone(), states);
            Ok(self.accept(next, 0.0))
        }
    }
}

/// Standard error of `sum num / sum den` from [`BATCHES`] batch ratios.
fn batch_stderr(num: &[f64], den: &[f64]) -> f64 {
    let size = num.len() / BATCHES;
    if size < 1 || BATCHES < 2 {
        return 0.0;
    }
    let ratios: Vec<f64> = num
        .chunks(size)
        .zip(den.chunks(size))
        .take(BATCHES)
        .map(|(a, b)| a.iter().sum::<f64>() / b.iter().sum::<f64>())
        .collect();
    if ratios.iter().any(|r| !r.is_finite()) {
        return f64::INFINITY;
    }
    let b = ratios.len() as f64;
    let mu = ratios.iter().sum::<f64>() / b;
    let var = ratios.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / (b - 1.0);
    sqrt(var / b)
}

/// Runs one chain for `steps` moves, discarding the first `burn_in`, and
/// estimates `sum W / sum W^(scheme)`.
pub fn mcmc_weighted_sign(
    pmr: &PmrForm,
    beta: f64,
    scheme: Scheme,
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<SignEstimate> {
    if steps <= burn_in {
        return Err(Error::InvalidInput(format!("steps ({steps}) must exceed burn_in ({burn_in})")));
    }
    let mut chain = Chain::new(pmr, beta, scheme, None, seed)?;
    let kept = (steps - burn_in) as usize;
    let (mut num, mut den) = (Vec::with_capacity(kept), Vec::with_capacity(kept));
    for i in 0..steps {
        chain.step()?;
        if i >= burn_in {
            num.push(chain.cur.num);
            den.push(chain.cur.den);
        }
    }
    let mean = num.iter().sum::<f64>() / den.iter().sum::<f64>();
    Ok(SignEstimate {
        scheme,
        mean,
        stderr: batch_stderr(&num, &den),
        n_samples: kept as u64,
        acceptance_rate: chain.acceptance_rate(),
    })
}

/// Inverse-variance weighted combination of independent chains. Chains
/// with zero standard error are averaged plainly if every chain has one.
pub fn combine_estimates(parts: &[SignEstimate]) -> Result<SignEstimate> {
    let first = parts.first().ok_or_else(|| Error::InvalidInput("no estimates to combine".into()))?;
    let n_samples: u64 = parts.iter().map(|p| p.n_samples).sum();
    let acceptance_rate = parts.iter().map(|p| p.acceptance_rate * p.n_samples as f64).sum::<f64>() / n_samples as f64;
    let (mean, stderr) = if parts.iter().any(|p| p.stderr == 0.0) {
        let m = parts.iter().map(|p| p.mean * p.n_samples as f64).sum::<f64>() / n_samples as f64;
        let s = sqrt(parts.iter().map(|p| p.stderr * p.stderr).sum::<f64>()) / parts.len() as f64;
        (m, s)
    } else {
        let w: Vec<f64> = parts.iter().map(|p| 1.0 / (p.stderr * p.stderr)).collect();
        let wsum: f64 = w.iter().sum();
        let m = parts.iter().zip(&w).map(|(p, w)| p.mean * w).sum::<f64>() / wsum;
        (m, sqrt(1.0 / wsum))
    };
    Ok(SignEstimate { scheme: first.scheme, mean, stderr, n_samples, acceptance_rate })
}

/// Total-variation distance between the reweighted visit frequencies of a
/// chain restricted to `q <= q_cap` and the normalized scheme weights on
/// that truncated space.
pub fn exact_chain_check(pmr: &PmrForm, beta: f64, scheme: Scheme, q_cap: usize, steps: u64, seed: u64) -> Result<f64> {
    let configs = enumerate_configs(pmr, q_cap)?;
    if configs.len() > EXACT_CHECK_MAX_STATES {
        return Err(Error::BudgetExceeded { cap: EXACT_CHECK_MAX_STATES as u64 });
    }
    let mut target: BTreeMap<Configuration, f64> = BTreeMap::new();
    for cfg in configs {
        let w = config_weight(pmr, beta, &cfg)?;
        let pi = match scheme {
            Scheme::Stoq => w.w_stoq,
            Scheme::Abs => w.w_abs,
        };
        target.insert(cfg, pi);
    }
    let total: f64 = target.values().sum();
    let mut chain = Chain::new(pmr, beta, scheme, Some(q_cap), seed)?;
    let burn_in = steps / 10;
    let mut visits: BTreeMap<Configuration, f64> = BTreeMap::new();
    let mut counted = 0.0;
    for i in 0..steps {
        chain.step()?;
        if i >= burn_in {
            *visits.entry(chain.config()).or_insert(0.0) += chain.reweight();
            counted += chain.reweight();
        }
    }
    let mut tv = 0.0;
    for (cfg, pi) in &target {
        let emp = visits.get(cfg).copied().unwrap_or(0.0) / counted;
        tv += (emp - pi / total).abs();
    }
    if visits.keys().any(|c| !target.contains_key(c)) {
        return Err(Error::InvalidInput("chain left the truncated configuration space".into()));
    }
    Ok(0.5 * tv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::walk_states;
    use crate::hamiltonian::{Amplitude, Hamiltonian, Tolerances};
    use crate::pmr::decompose_pmr;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn pmr_of(n: usize, t: &[(usize, usize, Amplitude)]) -> PmrForm {
        decompose_pmr(&Hamiltonian::from_sparse(n, t, &Tolerances::DEFAULT).unwrap())
    }

    #[test]
    fn loops_include_backtracks_and_cycles() {
        let one = c(1.0, 0.0);
        let p = pmr_of(3, &[(0, 1, one), (0, 2, one), (1, 2, one)]);
        let loops = Loops::build(&p);
        // two backtracks and two triangle orientations at each vertex
        for v in 0..3 {
            assert_eq!(loops.at[v].len(), 4);
            for l in &loops.at[v] {
                assert!(walk_states(&p, &Configuration::new(v, l.clone())).is_ok());
            }
        }
    }

    #[test]
    fn moves_preserve_closure() {
        let p = pmr_of(
            4,
            &[
                (0, 1, c(0.5, 0.5)),
                (1, 2, c(-0.7, 0.0)),
                (2, 3, c(0.2, -0.4)),
                (0, 3, c(0.9, 0.0)),
                (0, 2, c(0.3, 0.3)),
            ],
        );
        let mut chain = Chain::new(&p, 1.3, Scheme::Stoq, None, 7).unwrap();
        for _ in 0..100_000 {
            chain.step().unwrap();
            let cfg = chain.config();
            assert_eq!(walk_states(&p, &cfg).unwrap(), chain.cur.states);
            assert!(chain.ratio().abs() <= 1.0);
        }
        assert!(chain.acceptance_rate() > 0.0);
    }

    #[test]
    fn empty_config_insert_and_delete() {
        let p = pmr_of(2, &[(0, 1, c(-1.0, 0.0))]);
        let chain = Chain::new(&p, 1.0, Scheme::Stoq, None, 1).unwrap();
        assert!(chain.loops.matches_at(0, &chain.cur.seq, 0).next().is_none());
        assert_eq!(chain.loops.at[0], vec![vec![0, 0]]);
    }

    #[test]
    fn stoquastic_is_exactly_one() {
        let p = pmr_of(3, &[(0, 1, c(-1.0, 0.0)), (1, 2, c(-0.5, 0.0)), (0, 2, c(-0.2, 0.0))]);
        for scheme in [Scheme::Stoq, Scheme::Abs] {
            let est = mcmc_weighted_sign(&p, 1.0, scheme, 20_000, 1_000, 3).unwrap();
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.stderr, 0.0);
            assert_eq!(est.n_samples, 19_000);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let one = c(1.0, 0.0);
        let p = pmr_of(3, &[(0, 1, one), (0, 2, one), (1, 2, one)]);
        let a = mcmc_weighted_sign(&p, 1.0, Scheme::Stoq, 20_000, 100, 11).unwrap();
        let b = mcmc_weighted_sign(&p, 1.0, Scheme::Stoq, 20_000, 100, 11).unwrap();
        assert_eq!(a, b);
        assert!(mcmc_weighted_sign(&p, 1.0, Scheme::Stoq, 10, 10, 11).is_err());
    }

    #[test]
    fn combine() {
        let e = |mean, stderr| SignEstimate { scheme: Scheme::Stoq, mean, stderr, n_samples: 10, acceptance_rate: 0.5 };
        let c = combine_estimates(&[e(0.2, 0.1), e(0.4, 0.1)]).unwrap();
        assert!((c.mean - 0.3).abs() < 1e-15);
        assert!((c.stderr - 0.1 / sqrt(2.0)).abs() < 1e-15);
        assert_eq!(c.n_samples, 20);
        assert!(combine_estimates(&[]).is_err());
    }

    #[test]
    fn single_state_chain_is_exact() {
        let p = pmr_of(1, &[(0, 0, c(0.3, 0.0))]);
        assert_eq!(exact_chain_check(&p, 1.0, Scheme::Stoq, 4, 1000, 0).unwrap(), 0.0);
    }
}
