//! The phase graph of a Hamiltonian and the vanishing-geometric-phase test.
//!
//! Each off-diagonal pair `{i, j}` with `i < j` becomes an edge carrying
//! `(r, phi)` with `H_ij = -r e^{i phi}` (equivalently `H_ji = -r e^{-i phi}`).
//! Walking `i -> j` adds `phi`, walking `j -> i` adds `-phi`.

mod cos;
mod cycles;
mod generate;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hamiltonian::{Amplitude, Hamiltonian};
use crate::math::{atan2, cos, sin, wrap_phase};

pub use cos::first_negative_cos_multiple;
pub use generate::{generate_sign_problem, generate_spf, generate_stoquastic, SignProblemInstance};

/// Default tolerance for `phase == 0 (mod 2 pi)` tests.
pub const TOL_PHASE: f64 = 1e-8;

/// Polar data of one undirected edge, oriented from the lower to the higher
/// vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub r: f64,
    pub phi: f64,
}

/// A simple cycle `v_0 -> v_1 -> ... -> v_{k-1} -> v_0` and its phase.
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub phase: f64,
}

/// Diagonal rotation angles `theta_z`, each in `(-pi, pi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRotation {
    pub theta: Vec<f64>,
}

impl PhaseRotation {
    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n] }
    }

    /// The inverse rotation.
    pub fn negated(&self) -> Self {
        Self { theta: self.theta.iter().map(|&t| wrap_phase(-t)).collect() }
    }
}

/// Outcome of [`PhaseGraph::is_vgp`].
#[derive(Clone, Debug, PartialEq)]
pub struct VgpReport {
    pub is_vgp: bool,
    pub components: usize,
    /// Fundamental cycles whose phase is nonzero, one per offending non-tree
    /// edge.
    pub violations: Vec<Cycle>,
    /// Curing rotation; present exactly when `is_vgp`.
    pub rotation: Option<PhaseRotation>,
}

/// Basis states as vertices, off-diagonal elements as phase-carrying edges.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGraph {
    n_vertices: usize,
    energy: Vec<f64>,
    edges: BTreeMap<(usize, usize), Edge>,
    adjacency: Vec<Vec<usize>>,
}

pub(super) struct SpanningForest {
    pub(super) parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    theta: Vec<f64>,
    components: usize,
}

impl PhaseGraph {
    /// Builds the graph from every off-diagonal pair with `|H_ij| > tol_zero`.
    pub fn build(h: &Hamiltonian, tol_zero: f64) -> Self {
        let n = h.dim();
        let mut edges = BTreeMap::new();
        let mut adjacency = vec![Vec::new(); n];
        for ((i, j), a) in h.upper() {
            let r = a.norm();
            if r <= tol_zero {
                continue;
            }
            let phi = step_phase(a);
            edges.insert((i, j), Edge { r, phi });
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self { n_vertices: n, energy: h.diagonal(), edges, adjacency }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges keyed by `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), Edge)> + '_ {
        self.edges.iter().map(|(&k, &e)| (k, e))
    }

    /// Sorted neighbour list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|adj| adj.binary_search(&b).is_ok())
    }

    /// Phase picked up by the step `from -> to`, if the edge exists.
    pub fn oriented_phase(&self, from: usize, to: usize) -> Option<f64> {
        if from < to {
            self.edges.get(&(from, to)).map(|e| e.phi)
        } else {
            self.edges.get(&(to, from)).map(|e| -e.phi)
        }
    }

    /// Sum of oriented phases around the closed vertex sequence, wrapped
    /// into `(-pi, pi]`.
    pub fn cycle_phase(&self, vertices: &[usize]) -> Result<f64> {
        let k = vertices.len();
        let mut total = 0.0;
        for idx in 0..k {
            let (a, b) = (vertices[idx], vertices[(idx + 1) % k]);
            total += self.oriented_phase(a, b).ok_or(Error::MissingEdge(a, b))?;
        }
        Ok(wrap_phase(total))
    }

    pub(super) fn spanning_forest(&self) -> SpanningForest {
        let n = self.n_vertices;
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut theta = vec![0.0; n];
        let mut visited = vec![false; n];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if visited[root] {
                continue;
            }
            components += 1;
            visited[root] = true;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if !visited[w] {
                        visited[w] = true;
                        parent[w] = Some(u);
                        depth[w] = depth[u] + 1;
                        theta[w] = theta[u] + self.oriented_phase(u, w).unwrap();
                        queue.push_back(w);
                    }
                }
            }
        }
        SpanningForest { parent, depth, theta, components }
    }

    /// Spanning-forest test of the vanishing-geometric-phase condition.
    ///
    /// Potentials are propagated from the lowest vertex of each component
    /// (`theta = 0`) along a breadth-first tree. Every non-tree edge then
    /// closes a fundamental cycle whose phase is `phi_ij + theta_i - theta_j`.
    pub fn is_vgp(&self, tol_phase: f64) -> VgpReport {
        let forest = self.spanning_forest();
        let mut violations = Vec::new();
        for (&(i, j), e) in &self.edges {
            if forest.parent[j] == Some(i) || forest.parent[i] == Some(j) {
                continue;
            }
            let phase = wrap_phase(e.phi + forest.theta[i] - forest.theta[j]);
            if phase.abs() > tol_phase {
                let vertices = fundamental_cycle(&forest, i, j);
                violations.push(Cycle { vertices, phase });
            }
        }
        let is_vgp = violations.is_empty();
        let rotation = is_vgp.then(|| PhaseRotation { theta: forest.theta.iter().map(|&t| wrap_phase(t)).collect() });
        VgpReport { is_vgp, components: forest.components, violations, rotation }
    }

    /// Rotation `theta` with `phi_ij + theta_i - theta_j = 0 (mod 2 pi)` on
    /// every edge, so that [`apply_rotation`] with it yields a stoquastic
    /// matrix.
    pub fn cure_phases(&self, tol_phase: f64) -> Result<PhaseRotation> {
        let report = self.is_vgp(tol_phase);
        match report.rotation {
            Some(r) => Ok(r),
            None => {
                let worst =
                    report.violations.into_iter().max_by(|a, b| a.phase.abs().total_cmp(&b.phase.abs())).unwrap();
                Err(Error::NotVgp { cycle: worst.vertices, phase: worst.phase })
            }
        }
    }

    /// Connected component label of each vertex, labels numbered by lowest
    /// member.
    pub fn component_labels(&self) -> Vec<usize> {
        let forest = self.spanning_forest();
        let mut label = vec![usize::MAX; self.n_vertices];
        let mut next = 0;
        for v in 0..self.n_vertices {
            let mut root = v;
            while let Some(p) = forest.parent[root] {
                root = p;
            }
            if label[root] == usize::MAX {
                label[root] = next;
                next += 1;
            }
            label[v] = label[root];
        }
        label
    }

    /// Chordless cycles of length at most `max_len`, at most `max_count` of
    /// them, sorted lexicographically. The flag reports whether the count
    /// cap cut the search short.
    pub fn chordless_cycles(&self, max_len: usize, max_count: usize) -> (Vec<Cycle>, bool) {
        cycles::chordless(self, max_len, max_count)
    }

    /// True when no edge joins two non-consecutive vertices of the cycle.
    pub fn is_chordless(&self, vertices: &[usize]) -> bool {
        cycles::is_chordless(self, vertices)
    }
}

/// Phase `phi` of the step `v -> w` given `H_vw = -r e^{i phi}`.
pub(crate) fn step_phase(h_vw: Amplitude) -> f64 {
    let p = atan2(-h_vw.im, -h_vw.re);
    wrap_phase(p)
}

fn fundamental_cycle(forest: &SpanningForest, i: usize, j: usize) -> Vec<usize> {
    // i -> j across the non-tree edge, then up the tree from j to the common
    // ancestor and down to i
    let (mut a, mut b) = (i, j);
    let mut up_i = vec![a];
    let mut up_j = vec![b];
    while forest.depth[a] > forest.depth[b] {
        a = forest.parent[a].unwrap();
        up_i.push(a);
    }
    while forest.depth[b] > forest.depth[a] {
        b = forest.parent[b].unwrap();
        up_j.push(b);
    }
    while a != b {
        a = forest.parent[a].unwrap();
        b = forest.parent[b].unwrap();
        up_i.push(a);
        up_j.push(b);
    }
    let mut out = vec![i];
    out.extend_from_slice(&up_j);
    out.extend(up_i[1..up_i.len() - 1].iter().rev());
    out
}

/// `H'_ij = H_ij e^{i (theta_i - theta_j)}`; the diagonal is untouched.
pub fn apply_rotation(h: &Hamiltonian, rotation: &PhaseRotation) -> Result<Hamiltonian> {
    if rotation.theta.len() != h.dim() {
        return Err(Error::Dimension(alloc::format!(
            "rotation has {} angles for dimension {}",
            rotation.theta.len(),
            h.dim()
        )));
    }
    let t = &rotation.theta;
    let upper = h.upper().map(|((i, j), a)| {
        let d = t[i] - t[j];
        ((i, j), a * Amplitude::new(cos(d), sin(d)))
    });
    Ok(Hamiltonian::from_upper(h.dim(), &h.diagonal(), upper, h.n_qubits(), 0.0))
}
