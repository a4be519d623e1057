//! Sign-problem analysis of Hamiltonians in a fixed computational basis.
//!
//! A Hamiltonian is read as a weighted graph whose vertices are basis states
//! and whose edges are the nonzero off-diagonal elements, written in polar
//! form `H_ij = -r e^{i phi}`. The quantum Monte Carlo expansion of
//! `Z = tr exp(-beta H)` in the permutation matrix representation has
//! nonnegative weights exactly when every cycle of that graph carries a
//! vanishing geometric phase (sum of `phi` equal to zero modulo `2 pi`).
//!
//! The crate provides:
//!
//! * [`hamiltonian`]: Hamiltonian construction (dense, sparse, Pauli),
//!   hermiticity validation and stoquasticization.
//! * [`pmr`]: decomposition into a diagonal plus generalized permutations.
//! * [`phase_graph`]: the phase graph, the vanishing-phase test, chordless
//!   cycles, diagonal curing rotations and instance generators.
//! * [`divdiff`]: divided differences of `exp(-beta x)` in signed-log form.
//! * [`expansion`]: configuration enumeration, weights, truncated
//!   partition-function series and weighted signs.
//! * [`sampler`]: a Metropolis chain over closed configurations.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod divdiff;
pub mod error;
pub mod expansion;
pub mod hamiltonian;
pub mod math;
pub mod phase_graph;
pub mod pmr;
pub mod sampler;
pub mod signed_log;

pub use divdiff::{divdiff_exp, divdiff_naive, divdiff_sign, EnergyList};
pub use error::{Error, Result};
pub use expansion::{
    config_weight, enumerate_configs, partition_function_exact, partition_function_series, sign_decay_scan,
    walk_states, weighted_signs, Configuration, WeightBreakdown, WeightedSignReport,
};
pub use hamiltonian::{Amplitude, Hamiltonian, PauliTerm, Tolerances};
pub use phase_graph::{apply_rotation, Cycle, PhaseGraph, PhaseRotation, VgpReport, TOL_PHASE};
pub use pmr::{decompose_pmr, recompose, PmrForm, PmrTerm};
pub use sampler::{combine_estimates, exact_chain_check, mcmc_weighted_sign, Chain, Scheme, SignEstimate};
pub use signed_log::SignedLogValue;
