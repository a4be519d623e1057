//! Configurations of the permutation-matrix expansion and their weights.
//!
//! A configuration `(z, i_1..i_q)` walks `z_0 = z`, `z_k = P_{i_k} z_{k-1}`
//! and contributes when the walk closes. Writing each step coefficient as
//! `d = -r e^{-i phi}`, its real weight is
//!
//! ```text
//! W = prod(r) cos(Phi) |f[E_{z_0}, ..., E_{z_q}]|,   Phi = sum(phi)
//! ```
//!
//! with `f = exp(-beta x)`. The stoquasticized weight drops the cosine and
//! the abs weight keeps `|cos Phi|`.

mod scalar;
mod series;
mod spectral;
mod walk;

use alloc::format;
use alloc::vec::Vec;

use crate::divdiff::{divdiff_sign, ln_abs_divdiff};
use crate::error::{Error, Result};
use crate::hamiltonian::Amplitude;
use crate::math::{atan2, cos, exp, ln, wrap_phase};
use crate::pmr::PmrForm;
use crate::signed_log::SignedLogValue;

pub use series::{
    partition_function_series, partition_function_series_with, phase_census, sign_decay_scan, tail_bound,
    weighted_signs, weighted_signs_with, LayerSums, PartitionSeries, PhaseClassSum, Sequential, SeriesOptions,
    StartMap, WeightedSignReport, DEFAULT_BUDGET,
};
pub use spectral::{ln_partition_function_exact, partition_function_exact, ORACLE_DIM_CAP};
pub use walk::{enumerate_configs, find_negative_weight, visit_closed_walks, ClosedWalk};

/// Initial state plus a sequence of 0-based term indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub z: usize,
    pub seq: Vec<usize>,
}

impl Configuration {
    pub fn new(z: usize, seq: Vec<usize>) -> Self {
        Self { z, seq }
    }

    pub fn q(&self) -> usize {
        self.seq.len()
    }
}

/// Every factor entering the weight of one closed configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightBreakdown {
    pub states: Vec<usize>,
    pub energies: Vec<f64>,
    /// `prod r`, always positive.
    pub r_product: SignedLogValue,
    /// `Phi` reduced to `(-pi, pi]`.
    pub phase_total: f64,
    /// The divided difference itself, sign `(-1)^q`.
    pub dd: SignedLogValue,
    pub w_true: f64,
    pub w_stoq: f64,
    pub w_abs: f64,
    /// `ln w_stoq`, finite even when `w_stoq` underflows.
    pub ln_w_stoq: f64,
}

/// Phase `phi` of a step with coefficient `d = -r e^{-i phi}`.
#[inline]
pub(crate) fn phase_of_coeff(d: Amplitude) -> f64 {
    wrap_phase(-atan2(-d.im, -d.re))
}

/// States visited by the configuration; fails unless the walk is defined
/// at every step and returns to `z`.
pub fn walk_states(pmr: &PmrForm, config: &Configuration) -> Result<Vec<usize>> {
    if config.z >= pmr.dim {
        return Err(Error::InvalidInput(format!("state {} outside dimension {}", config.z, pmr.dim)));
    }
    let mut states = Vec::with_capacity(config.q() + 1);
    let mut z = config.z;
    states.push(z);
    for &term in &config.seq {
        let t = pmr.terms.get(term).ok_or_else(|| Error::InvalidInput(format!("term index {term} out of range")))?;
        z = t.image(z).ok_or(Error::Undefined { term, state: z })?;
        states.push(z);
    }
    if z != config.z {
        return Err(Error::NotClosed);
    }
    Ok(states)
}

/// Weight breakdown of a closed configuration at inverse temperature `beta`.
pub fn config_weight(pmr: &PmrForm, beta: f64, config: &Configuration) -> Result<WeightBreakdown> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let states = walk_states(pmr, config)?;
    let mut ln_r = 0.0;
    let mut phase = 0.0;
    for (k, &term) in config.seq.iter().enumerate() {
        let d = pmr.terms[term].diag[states[k + 1]];
        ln_r += ln(d.norm());
        phase += phase_of_coeff(d);
    }
    let energies: Vec<f64> = states.iter().map(|&s| pmr.classical_diag[s]).collect();
    Ok(assemble(states, energies, beta, ln_r, wrap_phase(phase)))
}

pub(crate) fn assemble(states: Vec<usize>, energies: Vec<f64>, beta: f64, ln_r: f64, phase: f64) -> WeightBreakdown {
    let q = states.len() - 1;
    let ln_dd = ln_abs_divdiff(beta, &energies);
    let ln_w = ln_r + ln_dd;
    let w_stoq = exp(ln_w);
    let c = cos(phase);
    WeightBreakdown {
        states,
        energies,
        r_product: SignedLogValue::from_ln(ln_r),
        phase_total: phase,
        dd: SignedLogValue::new(divdiff_sign(q), ln_dd),
        w_true: c * w_stoq,
        w_stoq,
        w_abs: c.abs() * w_stoq,
        ln_w_stoq: ln_w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divdiff::{divdiff_exp, EnergyList};
    use crate::hamiltonian::{Hamiltonian, Tolerances};
    use crate::pmr::decompose_pmr;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    pub(crate) fn minus_x() -> PmrForm {
        decompose_pmr(&Hamiltonian::from_sparse(2, &[(0, 1, c(-1.0, 0.0))], &Tolerances::DEFAULT).unwrap())
    }

    fn all_ones_triangle() -> PmrForm {
        let one = c(1.0, 0.0);
        decompose_pmr(
            &Hamiltonian::from_sparse(3, &[(0, 1, one), (0, 2, one), (1, 2, one)], &Tolerances::DEFAULT).unwrap(),
        )
    }

    #[test]
    fn walk_examples() {
        let p = minus_x();
        assert_eq!(walk_states(&p, &Configuration::new(0, vec![])).unwrap(), vec![0]);
        assert_eq!(walk_states(&p, &Configuration::new(0, vec![0, 0])).unwrap(), vec![0, 1, 0]);
        assert_eq!(walk_states(&p, &Configuration::new(0, vec![0])), Err(Error::NotClosed));
        assert!(matches!(walk_states(&p, &Configuration::new(0, vec![3])), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn undefined_step() {
        let h = Hamiltonian::from_sparse(3, &[(0, 1, c(-1.0, 0.0))], &Tolerances::DEFAULT).unwrap();
        let p = decompose_pmr(&h);
        assert_eq!(walk_states(&p, &Configuration::new(2, vec![0])), Err(Error::Undefined { term: 0, state: 2 }));
    }

    #[test]
    fn weight_examples() {
        let p = minus_x();
        let w0 = config_weight(&p, 1.0, &Configuration::new(1, vec![])).unwrap();
        assert_eq!(w0.w_true, 1.0);
        assert_eq!(w0.w_stoq, 1.0);
        let w = config_weight(&p, 1.0, &Configuration::new(0, vec![0, 0])).unwrap();
        assert!((w.w_true - 0.5).abs() < 1e-15);
        assert_eq!(w.w_abs, w.w_true);

        let tri = all_ones_triangle();
        let seq = vec![0, 0, 0];
        let w = config_weight(&tri, 1.0, &Configuration::new(0, seq)).unwrap();
        assert!(w.w_true < 0.0);
        assert!((w.w_abs - w.w_stoq).abs() < 1e-15);
        assert!((w.phase_total.abs() - crate::math::PI).abs() < 1e-12);
    }

    #[test]
    fn weight_matches_direct_complex_product() {
        let h = Hamiltonian::from_sparse(
            3,
            &[(0, 1, c(0.3, 0.7)), (1, 2, c(-0.4, 0.1)), (0, 2, c(0.2, -0.5)), (1, 1, c(0.4, 0.0))],
            &Tolerances::DEFAULT,
        )
        .unwrap();
        let p = decompose_pmr(&h);
        let beta = 1.3;
        for cfg in enumerate_configs(&p, 5).unwrap() {
            let w = config_weight(&p, beta, &cfg).unwrap();
            let states = &w.states;
            let mut prod = c(1.0, 0.0);
            for (k, &t) in cfg.seq.iter().enumerate() {
                prod *= p.terms[t].diag[states[k + 1]];
            }
            let dd = divdiff_exp(&EnergyList::new(beta, w.energies.clone()).unwrap()).to_f64();
            let direct = prod.re * dd;
            assert!((direct - w.w_true).abs() <= 1e-10 * w.w_stoq.max(1e-300), "{cfg:?}");
            assert!(w.w_abs <= w.w_stoq * (1.0 + 1e-15));
            assert!((w.w_abs - w.w_true.abs()).abs() <= 1e-15 * w.w_stoq);
        }
    }
}
