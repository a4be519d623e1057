//! Permutation matrix representation: `H = D_0 + sum_j D_j P_j`.
//!
//! Every off-diagonal entry `H_{w v}` (row `w`, column `v`) is owned by
//! exactly one term `j`, which maps the source state `v` to the target
//! `w = P_j v` with coefficient `d_j[w] = H_{w v}`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::hamiltonian::{Amplitude, Hamiltonian};

/// One generalized permutation `D_j P_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PmrTerm {
    /// `perm[v] = Some(w)` when the term maps `v` to `w`.
    pub perm: Vec<Option<usize>>,
    /// Coefficients indexed by target state; zero where the term has no
    /// preimage.
    pub diag: Vec<Amplitude>,
}

impl PmrTerm {
    /// Image of `v`, if defined.
    #[inline]
    pub fn image(&self, v: usize) -> Option<usize> {
        self.perm[v]
    }

    /// Coefficient `d` for the step `v -> P v`.
    #[inline]
    pub fn coeff_from(&self, v: usize) -> Option<Amplitude> {
        self.perm[v].map(|w| self.diag[w])
    }

    /// Number of states with a defined image.
    pub fn support(&self) -> usize {
        self.perm.iter().filter(|p| p.is_some()).count()
    }
}

/// A Hamiltonian split into its classical diagonal and permutation terms.
#[derive(Clone, Debug, PartialEq)]
pub struct PmrForm {
    pub dim: usize,
    pub classical_diag: Vec<f64>,
    pub terms: Vec<PmrTerm>,
    pub n_qubits: Option<u32>,
}

impl PmrForm {
    /// Number of permutation terms `M`.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest `|d|` across all terms.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.perm.iter().zip(0..).filter_map(|(p, _)| p.map(|w| t.diag[w].norm())))
            .fold(0.0, f64::max)
    }

    /// Largest off-diagonal absolute row sum `max_w sum_v |H_{w v}|`.
    pub fn max_offdiag_row_sum(&self) -> f64 {
        let mut sums = vec![0.0f64; self.dim];
        for t in &self.terms {
            for w in t.perm.iter().flatten() {
                sums[*w] += t.diag[*w].norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Outgoing steps `(term, target, d)` from `v`, in term order.
    pub fn steps_from(&self, v: usize) -> impl Iterator<Item = (usize, usize, Amplitude)> + '_ {
        self.terms.iter().enumerate().filter_map(move |(j, t)| t.perm[v].map(|w| (j, w, t.diag[w])))
    }

    /// Adjacency lists of the underlying walk graph: `out[v]` holds
    /// `(term, target)` pairs in term order.
    pub fn out_steps(&self) -> Vec<Vec<(usize, usize)>> {
        (0..self.dim).map(|v| self.steps_from(v).map(|(j, w, _)| (j, w)).collect()).collect()
    }
}

/// Splits `h` into `D_0` plus generalized permutations.
///
/// Matrices built from Pauli strings get one term per bit-flip mask, in
/// ascending mask order. Other matrices are peeled by repeated maximum
/// bipartite matching on the remaining off-diagonal support, rows and
/// columns scanned in ascending order.
pub fn decompose_pmr(h: &Hamiltonian) -> PmrForm {
    let dim = h.dim();
    let classical_diag = h.diagonal();
    let terms = if h.n_qubits().is_some() { by_flip_mask(h) } else { by_matching(h) };
    PmrForm { dim, classical_diag, terms, n_qubits: h.n_qubits() }
}

fn empty_term(dim: usize) -> PmrTerm {
    PmrTerm { perm: vec![None; dim], diag: vec![Amplitude::new(0.0, 0.0); dim] }
}

fn by_flip_mask(h: &Hamiltonian) -> Vec<PmrTerm> {
    let dim = h.dim();
    let mut groups: BTreeMap<usize, PmrTerm> = BTreeMap::new();
    for ((w, v), a) in h.off_diagonal() {
        let t = groups.entry(w ^ v).or_insert_with(|| empty_term(dim));
        t.perm[v] = Some(w);
        t.diag[w] = a;
    }
    groups.into_values().collect()
}

fn by_matching(h: &Hamiltonian) -> Vec<PmrTerm> {
    let dim = h.dim();
    // remaining[w] = sorted source columns still uncovered in row w
    let mut remaining: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for ((w, v), _) in h.off_diagonal() {
        remaining[w].push(v);
    }
    let mut left: usize = remaining.iter().map(Vec::len).sum();
    let mut terms = Vec::new();
    while left > 0 {
        let col_owner = maximum_matching(&remaining, dim);
        let mut term = empty_term(dim);
        for (v, owner) in col_owner.iter().enumerate() {
            if let Some(w) = *owner {
                term.perm[v] = Some(w);
                term.diag[w] = h.entry(w, v);
                remaining[w].retain(|&c| c != v);
                left -= 1;
            }
        }
        terms.push(term);
    }
    terms
}

/// Kuhn's augmenting-path algorithm. Returns `owner[col] = Some(row)`.
fn maximum_matching(rows: &[Vec<usize>], n_cols: usize) -> Vec<Option<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; n_cols];
    let mut seen = vec![0usize; n_cols];
    for (stamp, row) in (1..).zip(0..rows.len()) {
        augment(row, rows, &mut owner, &mut seen, stamp);
    }
    owner
}

fn augment(row: usize, rows: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [usize], stamp: usize) -> bool {
    // explicit stack of (row, next candidate index) to avoid deep recursion
    let mut stack: Vec<(usize, usize)> = vec![(row, 0)];
    let mut trail: Vec<usize> = Vec::new();
    while let Some(&mut (r, ref mut idx)) = stack.last_mut() {
        if *idx >= rows[r].len() {
            stack.pop();
            trail.pop();
            continue;
        }
        let c = rows[r][*idx];
        *idx += 1;
        if seen[c] == stamp {
            continue;
        }
        seen[c] = stamp;
        trail.push(c);
        match owner[c] {
            None => {
                // flip the alternating path recorded in stack/trail
                for (k, &(rr, _)) in stack.iter().enumerate() {
                    owner[trail[k]] = Some(rr);
                }
                return true;
            }
            Some(next) => stack.push((next, 0)),
        }
    }
    false
}

/// Rebuilds `D_0 + sum_j D_j P_j`.
pub fn recompose(pmr: &PmrForm) -> Hamiltonian {
    let mut upper = Vec::new();
    for t in &pmr.terms {
        for (v, p) in t.perm.iter().enumerate() {
            if let Some(w) = *p {
                if w < v {
                    upper.push(((w, v), t.diag[w]));
                }
            }
        }
    }
    Hamiltonian::from_upper(pmr.dim, &pmr.classical_diag, upper, pmr.n_qubits, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{PauliTerm, Tolerances};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn minus_x() -> Hamiltonian {
        Hamiltonian::from_sparse(2, &[(0, 1, c(-1.0, 0.0))], &Tolerances::DEFAULT).unwrap()
    }

    #[test]
    fn minus_x_single_swap() {
        let p = decompose_pmr(&minus_x());
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.terms[0].perm, vec![Some(1), Some(0)]);
        assert_eq!(p.terms[0].diag, vec![c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(recompose(&p), minus_x());
    }

    #[test]
    fn all_ones_triangle_gives_two_three_cycles() {
        let h = Hamiltonian::from_sparse(
            3,
            &[(0, 1, c(1.0, 0.0)), (0, 2, c(1.0, 0.0)), (1, 2, c(1.0, 0.0))],
            &Tolerances::DEFAULT,
        )
        .unwrap();
        let p = decompose_pmr(&h);
        assert_eq!(p.num_terms(), 2);
        for t in &p.terms {
            assert_eq!(t.support(), 3);
            // a 3-cycle: applying three times returns every state
            for z in 0..3 {
                let z3 = t.image(t.image(t.image(z).unwrap()).unwrap()).unwrap();
                assert_eq!(z3, z);
                assert_ne!(t.image(z), Some(z));
            }
            assert!(t.diag.iter().all(|&d| d == c(1.0, 0.0)));
        }
        assert_ne!(p.terms[0].perm, p.terms[1].perm);
        assert_eq!(recompose(&p), h);
    }

    #[test]
    fn pauli_y_target_indexed() {
        let h = Hamiltonian::from_pauli(1, &[PauliTerm::new(c(1.0, 0.0), "Y")], &Tolerances::DEFAULT).unwrap();
        let p = decompose_pmr(&h);
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.terms[0].diag, vec![c(0.0, -1.0), c(0.0, 1.0)]);
    }

    #[test]
    fn pauli_grouping_by_mask() {
        let t = Tolerances::DEFAULT;
        let h = Hamiltonian::from_pauli(
            2,
            &[
                PauliTerm::new(c(1.0, 0.0), "XI"),
                PauliTerm::new(c(0.5, 0.0), "YZ"),
                PauliTerm::new(c(0.3, 0.0), "IX"),
                PauliTerm::new(c(0.2, 0.0), "XX"),
                PauliTerm::new(c(0.7, 0.0), "ZZ"),
            ],
            &t,
        )
        .unwrap();
        let p = decompose_pmr(&h);
        assert_eq!(p.num_terms(), 3);
        for term in &p.terms {
            let masks: Vec<usize> = term.perm.iter().enumerate().filter_map(|(v, w)| w.map(|w| w ^ v)).collect();
            assert!(masks.windows(2).all(|m| m[0] == m[1]));
        }
        assert!(recompose(&p).max_deviation(&h) < 1e-15);
    }

    #[test]
    fn diagonal_only() {
        let h =
            Hamiltonian::from_sparse(2, &[(0, 0, c(0.5, 0.0)), (1, 1, c(-2.0, 0.0))], &Tolerances::DEFAULT).unwrap();
        let p = decompose_pmr(&h);
        assert!(p.terms.is_empty());
        assert_eq!(p.classical_diag, vec![0.5, -2.0]);
        assert_eq!(recompose(&p), h);
    }

    #[test]
    fn matching_handles_augmenting_paths() {
        // rows 0 and 1 both prefer column 2 first; a maximum matching needs 3 edges
        let rows = vec![vec![1, 2], vec![2], vec![0, 1]];
        let owner = maximum_matching(&rows, 3);
        assert_eq!(owner.iter().filter(|o| o.is_some()).count(), 3);
    }

    fn random_hermitian(n: usize, vals: &[(f64, f64, bool)]) -> Hamiltonian {
        let mut triples = Vec::new();
        let mut k = 0;
        for i in 0..n {
            triples.push((i, i, c(vals[k].0, 0.0)));
            k += 1;
            for j in (i + 1)..n {
                let (re, im, keep) = vals[k];
                k += 1;
                if keep {
                    triples.push((i, j, c(re, im)));
                }
            }
        }
        Hamiltonian::from_sparse(n, &triples, &Tolerances::DEFAULT).unwrap()
    }

    proptest! {
        #[test]
        fn round_trip_and_distinct(
            n in 1usize..9,
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, proptest::bool::ANY), 45)
        ) {
            let h = random_hermitian(n, &vals);
            let p = decompose_pmr(&h);
            let back = recompose(&p);
            let scale = h.max_abs().max(1e-300);
            prop_assert!(back.max_deviation(&h) <= 1e-12 * scale);
            for (a, t) in p.terms.iter().enumerate() {
                prop_assert!(t.support() > 0);
                for (v, w) in t.perm.iter().enumerate() {
                    prop_assert_ne!(*w, Some(v));
                }
                for u in &p.terms[a + 1..] {
                    prop_assert_ne!(&t.perm, &u.perm);
                }
            }
        }
    }
}
