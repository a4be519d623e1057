//! Seeded random instances: stoquastic, curable (VGP) and sign-problematic.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{apply_rotation, PhaseGraph, PhaseRotation};
use crate::error::{Error, Result};
use crate::hamiltonian::{Amplitude, Hamiltonian, Tolerances};
use crate::math::{cos, sin, PI, TAU};

fn check_params(n: usize, density: f64, min_n: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::InvalidInput(format!("n must be at least {min_n}, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(format!("density must lie in (0, 1], got {density}")));
    }
    Ok(())
}

fn stoquastic_with(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Hamiltonian {
    let mut diag = Vec::with_capacity(n);
    for _ in 0..n {
        diag.push(rng.random_range(-1.0..=1.0));
    }
    let mut upper = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < density {
                let v: f64 = rng.random_range(-1.0..0.0);
                upper.push(((i, j), Amplitude::new(v, 0.0)));
            }
        }
    }
    Hamiltonian::from_upper(n, &diag, upper, None, Tolerances::DEFAULT.zero)
}

/// Real symmetric matrix with nonpositive off-diagonals. Each pair is present
/// with probability `density` and drawn from `[-1, 0)`; diagonal entries
/// come from `[-1, 1]`.
pub fn generate_stoquastic(n: usize, density: f64, seed: u64) -> Result<Hamiltonian> {
    check_params(n, density, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(stoquastic_with(&mut rng, n, density))
}

fn spf_with(rng: &mut ChaCha8Rng, n: usize, density: f64) -> (Hamiltonian, PhaseRotation) {
    let h = stoquastic_with(rng, n, density);
    let theta: Vec<f64> = (0..n).map(|_| PI - TAU * rng.random::<f64>()).collect();
    let rot = PhaseRotation { theta };
    (apply_rotation(&h, &rot).unwrap(), rot)
}

/// A stoquastic instance rotated by random phases `theta` in `(-pi, pi]`.
/// The result has vanishing geometric phase; `theta` is returned as ground
/// truth.
pub fn generate_spf(n: usize, density: f64, seed: u64) -> Result<(Hamiltonian, PhaseRotation)> {
    check_params(n, density, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(spf_with(&mut rng, n, density))
}

/// A curable instance with one non-tree edge multiplied by `e^{i delta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignProblemInstance {
    pub hamiltonian: Hamiltonian,
    /// Rotation used to build the curable parent instance.
    pub theta: PhaseRotation,
    /// The perturbed edge `(i, j)`, `i < j`.
    pub edge: (usize, usize),
    /// Phase added to `H_ij`, drawn from `(pi/4, pi)`.
    pub delta: f64,
}

/// Builds a curable instance, then twists one edge outside a breadth-first
/// spanning tree so that its fundamental cycle acquires the phase `delta`.
/// Acyclic draws first receive the missing edges of the triangle `{0, 1, 2}`.
pub fn generate_sign_problem(n: usize, density: f64, seed: u64) -> Result<SignProblemInstance> {
    check_params(n, density, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut h, theta) = spf_with(&mut rng, n, density);

    let mut candidates = non_tree_edges(&h);
    if candidates.is_empty() {
        let t = &theta.theta;
        let mut upper: Vec<((usize, usize), Amplitude)> = h.upper().collect();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if h.entry(i, j).norm() == 0.0 {
                let r = 1.0 - rng.random::<f64>();
                let d = t[i] - t[j];
                upper.push(((i, j), Amplitude::new(-r * cos(d), -r * sin(d))));
            }
        }
        h = Hamiltonian::from_upper(n, &h.diagonal(), upper, None, 0.0);
        candidates = non_tree_edges(&h);
    }
    let edge = candidates[rng.random_range(0..candidates.len())];
    let mut u: f64 = rng.random();
    while u == 0.0 {
        u = rng.random();
    }
    let delta = PI - 0.75 * PI * u;
    let twist = Amplitude::new(cos(delta), sin(delta));
    let upper = h.upper().map(|(k, a)| if k == edge { (k, a * twist) } else { (k, a) }).collect::<Vec<_>>();
    let hamiltonian = Hamiltonian::from_upper(n, &h.diagonal(), upper, None, 0.0);
    Ok(SignProblemInstance { hamiltonian, theta, edge, delta })
}

fn non_tree_edges(h: &Hamiltonian) -> Vec<(usize, usize)> {
    let g = PhaseGraph::build(h, 0.0);
    let forest = g.spanning_forest();
    g.edges().map(|(k, _)| k).filter(|&(i, j)| forest.parent[j] != Some(i) && forest.parent[i] != Some(j)).collect()
}
