//! Hermitian matrices in a fixed computational basis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A matrix element `H_ij`.
pub type Amplitude = Complex64;

/// Largest register accepted by the Pauli expansion (`N = 2^16`).
pub const MAX_QUBITS: u32 = 16;

/// Absolute per-entry tolerances used while validating input matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed `|H_ij - conj(H_ji)|`.
    pub herm: f64,
    /// Entries with magnitude at or below this are structural zeros.
    pub zero: f64,
}

impl Tolerances {
    pub const DEFAULT: Self = Self { herm: 1e-10, zero: 1e-12 };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A weighted Pauli string, e.g. `0.5 * XZIY`. Character `k` of the word acts
/// on bit `n_qubits - 1 - k` of the basis-state index.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: Amplitude,
    pub word: String,
}

impl PauliTerm {
    pub fn new(coeff: Amplitude, word: impl Into<String>) -> Self {
        Self { coeff, word: word.into() }
    }

    /// Returns `(flip_mask, phase_mask, y_count)` where `phase_mask` marks the
    /// `Y` and `Z` positions.
    fn masks(&self, n_qubits: u32) -> Result<(u64, u64, u32)> {
        if self.word.chars().count() != n_qubits as usize {
            return Err(Error::InvalidInput(format!(
                "Pauli word {:?} has length {} but n_qubits = {}",
                self.word,
                self.word.chars().count(),
                n_qubits
            )));
        }
        if !(self.coeff.re.is_finite() && self.coeff.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient on {:?}", self.word)));
        }
        if self.coeff.norm() == 0.0 {
            return Err(Error::InvalidInput(format!("zero coefficient on {:?}", self.word)));
        }
        let (mut flip, mut phase, mut ny) = (0u64, 0u64, 0u32);
        for (k, c) in self.word.chars().enumerate() {
            let bit = 1u64 << (n_qubits as usize - 1 - k);
            match c {
                'I' => {}
                'X' => flip |= bit,
                'Y' => {
                    flip |= bit;
                    phase |= bit;
                    ny += 1;
                }
                'Z' => phase |= bit,
                other => {
                    return Err(Error::InvalidInput(format!("invalid Pauli character {other:?} in {:?}", self.word)))
                }
            }
        }
        Ok((flip, phase, ny))
    }
}

/// A validated Hermitian matrix stored as a sparse map of its nonzero entries.
///
/// Construction symmetrizes the off-diagonal pairs so that
/// `entry(j, i) == entry(i, j).conj()` holds exactly afterwards, and drops
/// entries whose magnitude does not exceed the zero tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    dim: usize,
    entries: BTreeMap<(usize, usize), Amplitude>,
    n_qubits: Option<u32>,
}

impl Hamiltonian {
    /// Builds from a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<Amplitude>], tol: &Tolerances) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Dimension("matrix has no rows".into()));
        }
        let mut map = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!("row {i} has {} columns, expected {dim}", row.len())));
            }
            for (j, &a) in row.iter().enumerate() {
                if a != Amplitude::new(0.0, 0.0) {
                    map.insert((i, j), a);
                }
            }
        }
        Self::validated(dim, map, None, tol, false)
    }

    /// Builds from `(row, col, value)` triples. Listing only one triangle is
    /// enough; the other is inferred by conjugation. Listing both checks
    /// hermiticity.
    pub fn from_sparse(dim: usize, triples: &[(usize, usize, Amplitude)], tol: &Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dim must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for &(i, j, a) in triples {
            if i >= dim || j >= dim {
                return Err(Error::Dimension(format!("entry ({i}, {j}) outside dimension {dim}")));
            }
            if map.insert((i, j), a).is_some() {
                return Err(Error::InvalidInput(format!("entry ({i}, {j}) listed twice")));
            }
        }
        Self::validated(dim, map, None, tol, true)
    }

    /// Expands a sum of Pauli strings on `n_qubits` qubits into a `2^n` matrix.
    pub fn from_pauli(n_qubits: u32, terms: &[PauliTerm], tol: &Tolerances) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Dimension(format!("n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}")));
        }
        let dim = 1usize << n_qubits;
        let mut map: BTreeMap<(usize, usize), Amplitude> = BTreeMap::new();
        for term in terms {
            let (flip, phase, ny) = term.masks(n_qubits)?;
            let iy = match ny % 4 {
                0 => Amplitude::new(1.0, 0.0),
                1 => Amplitude::new(0.0, 1.0),
                2 => Amplitude::new(-1.0, 0.0),
                _ => Amplitude::new(0.0, -1.0),
            };
            let base = term.coeff * iy;
            for z in 0..dim as u64 {
                let target = z ^ flip;
                let a = if (z & phase).count_ones() % 2 == 0 { base } else { -base };
                *map.entry((target as usize, z as usize)).or_insert(Amplitude::new(0.0, 0.0)) += a;
            }
        }
        Self::validated(dim, map, Some(n_qubits), tol, false)
    }

    /// Assembles a matrix that is Hermitian by construction (used by the
    /// transformations in this crate). Entries at or below `zero_tol` are
    /// dropped and the lower triangle is rebuilt from the upper one.
    pub(crate) fn from_upper(
        dim: usize,
        diag: &[f64],
        upper: impl IntoIterator<Item = ((usize, usize), Amplitude)>,
        n_qubits: Option<u32>,
        zero_tol: f64,
    ) -> Self {
        let mut entries = BTreeMap::new();
        for (i, &e) in diag.iter().enumerate() {
            if e.abs() > zero_tol {
                entries.insert((i, i), Amplitude::new(e, 0.0));
            }
        }
        for ((i, j), a) in upper {
            debug_assert!(i < j);
            if a.norm() > zero_tol {
                entries.insert((i, j), a);
                entries.insert((j, i), a.conj());
            }
        }
        Self { dim, entries, n_qubits }
    }

    fn validated(
        dim: usize,
        raw: BTreeMap<(usize, usize), Amplitude>,
        n_qubits: Option<u32>,
        tol: &Tolerances,
        infer_lower: bool,
    ) -> Result<Self> {
        for (&(i, j), a) in &raw {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidInput(format!("entry ({i}, {j}) is not finite")));
            }
        }
        let zero = Amplitude::new(0.0, 0.0);
        let mut diag = vec![0.0; dim];
        let mut upper = BTreeMap::new();
        for (&(i, j), &a) in &raw {
            if i == j {
                if a.im.abs() > tol.herm {
                    return Err(Error::Hermiticity { row: i, col: i, deviation: a.im.abs() });
                }
                diag[i] = a.re;
                continue;
            }
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            if upper.contains_key(&(lo, hi)) {
                continue;
            }
            // value oriented as (lo, hi)
            let direct = raw.get(&(lo, hi)).copied();
            let mirrored = raw.get(&(hi, lo)).map(|b| b.conj());
            let value = match (direct, mirrored) {
                (Some(a), Some(b)) => {
                    let dev = (a - b).norm();
                    if dev > tol.herm {
                        return Err(Error::Hermiticity { row: lo, col: hi, deviation: dev });
                    }
                    (a + b) * 0.5
                }
                (Some(a), None) | (None, Some(a)) => {
                    if !infer_lower && a.norm() > tol.herm {
                        let (row, col) = if direct.is_some() { (hi, lo) } else { (lo, hi) };
                        return Err(Error::Hermiticity { row, col, deviation: a.norm() });
                    }
                    if infer_lower {
                        a
                    } else {
                        zero
                    }
                }
                (None, None) => unreachable!(),
            };
            upper.insert((lo, hi), value);
        }
        Ok(Self::from_upper(dim, &diag, upper, n_qubits, tol.zero))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Register size when the matrix came from Pauli input.
    pub fn n_qubits(&self) -> Option<u32> {
        self.n_qubits
    }

    pub fn entry(&self, i: usize, j: usize) -> Amplitude {
        self.entries.get(&(i, j)).copied().unwrap_or(Amplitude::new(0.0, 0.0))
    }

    /// All stored nonzero entries in `(row, col)` order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), Amplitude)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = ((usize, usize), Amplitude)> + '_ {
        self.entries().filter(|((i, j), _)| i != j)
    }

    /// Off-diagonal entries with `row < col`.
    pub fn upper(&self) -> impl Iterator<Item = ((usize, usize), Amplitude)> + '_ {
        self.entries().filter(|((i, j), _)| i < j)
    }

    /// Classical energies `E_z = H_zz`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entry(i, i).re).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Amplitude>> {
        let mut m = vec![vec![Amplitude::new(0.0, 0.0); self.dim]; self.dim];
        for ((i, j), a) in self.entries() {
            m[i][j] = a;
        }
        m
    }

    /// Largest entry magnitude (zero for the zero matrix).
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Replaces every off-diagonal entry by `-|H_ij|`; the diagonal is kept.
    pub fn stoquasticize(&self) -> Self {
        let diag = self.diagonal();
        let upper = self.upper().map(|(k, a)| (k, Amplitude::new(-a.norm(), 0.0)));
        Self::from_upper(self.dim, &diag, upper, self.n_qubits, 0.0)
    }

    /// True when every off-diagonal entry is real (up to `tol`) and nonpositive
    /// (up to `tol`).
    pub fn is_stoquastic(&self, tol: f64) -> bool {
        self.off_diagonal().all(|(_, a)| a.im.abs() <= tol && a.re <= tol)
    }

    /// Maximum entrywise deviation from `other`.
    pub fn max_deviation(&self, other: &Hamiltonian) -> f64 {
        let mut keys: Vec<(usize, usize)> = self.entries.keys().copied().collect();
        keys.extend(other.entries.keys().copied());
        keys.iter().map(|&(i, j)| (self.entry(i, j) - other.entry(i, j)).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    #[test]
    fn dense_minus_x() {
        let h = Hamiltonian::from_dense(
            &[vec![c(0.0, 0.0), c(-1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]],
            &Tolerances::DEFAULT,
        )
        .unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.off_diagonal().count(), 2);
        assert_eq!(h.entry(0, 1), c(-1.0, 0.0));
        assert_eq!(h.entry(1, 0), c(-1.0, 0.0));
        assert!(h.is_stoquastic(0.0));
    }

    #[test]
    fn pauli_y_entries() {
        let h = Hamiltonian::from_pauli(1, &[PauliTerm::new(c(1.0, 0.0), "Y")], &Tolerances::DEFAULT).unwrap();
        assert_eq!(h.entry(0, 1), c(0.0, -1.0));
        assert_eq!(h.entry(1, 0), c(0.0, 1.0));
        assert_eq!(h.entry(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn pauli_word_ordering() {
        // "XI": first character acts on the most significant bit.
        let h = Hamiltonian::from_pauli(2, &[PauliTerm::new(c(1.0, 0.0), "XI")], &Tolerances::DEFAULT).unwrap();
        assert_eq!(h.entry(2, 0), c(1.0, 0.0));
        assert_eq!(h.entry(1, 0), c(0.0, 0.0));
        let z = Hamiltonian::from_pauli(2, &[PauliTerm::new(c(1.0, 0.0), "IZ")], &Tolerances::DEFAULT).unwrap();
        assert_eq!(z.diagonal(), vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn sparse_hermiticity_violation() {
        let err =
            Hamiltonian::from_sparse(2, &[(0, 1, c(1.0, 0.0)), (1, 0, c(2.0, 0.0))], &Tolerances::DEFAULT).unwrap_err();
        assert!(matches!(err, Error::Hermiticity { .. }));
    }

    #[test]
    fn sparse_upper_triangle_inferred() {
        let h = Hamiltonian::from_sparse(3, &[(0, 2, c(0.0, 1.0)), (1, 1, c(0.5, 0.0))], &Tolerances::DEFAULT).unwrap();
        assert_eq!(h.entry(2, 0), c(0.0, -1.0));
        assert_eq!(h.diagonal(), vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn dense_asymmetric_rejected() {
        let err = Hamiltonian::from_dense(
            &[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]],
            &Tolerances::DEFAULT,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Hermiticity { row: 1, col: 0, .. }));
    }

    #[test]
    fn complex_diagonal_rejected() {
        let err = Hamiltonian::from_sparse(1, &[(0, 0, c(1.0, 0.1))], &Tolerances::DEFAULT).unwrap_err();
        assert!(matches!(err, Error::Hermiticity { .. }));
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(Hamiltonian::from_dense(&[], &Tolerances::DEFAULT), Err(Error::Dimension(_))));
        assert!(matches!(
            Hamiltonian::from_dense(&[vec![c(0.0, 0.0), c(0.0, 0.0)]], &Tolerances::DEFAULT),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Hamiltonian::from_sparse(2, &[(0, 2, c(1.0, 0.0))], &Tolerances::DEFAULT),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(Hamiltonian::from_pauli(17, &[], &Tolerances::DEFAULT), Err(Error::Dimension(_))));
    }

    #[test]
    fn bad_pauli_words() {
        let t = Tolerances::DEFAULT;
        assert!(matches!(
            Hamiltonian::from_pauli(2, &[PauliTerm::new(c(1.0, 0.0), "X")], &t),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            Hamiltonian::from_pauli(1, &[PauliTerm::new(c(1.0, 0.0), "Q")], &t),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            Hamiltonian::from_pauli(1, &[PauliTerm::new(c(0.0, 0.0), "X")], &t),
            Err(Error::InvalidInput(_))
        ));
        // imaginary coefficient on a Hermitian string gives an anti-Hermitian matrix
        assert!(matches!(
            Hamiltonian::from_pauli(1, &[PauliTerm::new(c(0.0, 1.0), "X")], &t),
            Err(Error::Hermiticity { .. })
        ));
    }

    #[test]
    fn tiny_entries_are_dropped() {
        let h = Hamiltonian::from_sparse(2, &[(0, 1, c(1e-13, 0.0))], &Tolerances::DEFAULT).unwrap();
        assert_eq!(h.off_diagonal().count(), 0);
    }

    #[test]
    fn stoquasticize_examples() {
        let t = Tolerances::DEFAULT;
        let h = Hamiltonian::from_sparse(2, &[(0, 1, c(0.5, 0.0))], &t).unwrap();
        assert_eq!(h.stoquasticize().entry(0, 1), c(-0.5, 0.0));
        let h = Hamiltonian::from_sparse(2, &[(0, 1, c(0.0, 1.0))], &t).unwrap();
        assert_eq!(h.stoquasticize().entry(0, 1), c(-1.0, 0.0));
        let h = Hamiltonian::from_sparse(2, &[(0, 1, c(-0.3, 0.0)), (0, 0, c(2.0, 0.0))], &t).unwrap();
        assert_eq!(h.stoquasticize(), h);
        let plus_x = Hamiltonian::from_sparse(2, &[(0, 1, c(1.0, 0.0))], &t).unwrap();
        assert!(!plus_x.is_stoquastic(1e-12));
    }

    fn pauli_strategy() -> impl Strategy<Value = (u32, Vec<(f64, String)>)> {
        (1u32..=4).prop_flat_map(|n| {
            let word = proptest::collection::vec(prop_oneof![Just('I'), Just('X'), Just('Y'), Just('Z')], n as usize)
                .prop_map(|v| v.into_iter().collect::<String>());
            (Just(n), proptest::collection::vec((-2.0f64..2.0, word), 1..6))
        })
    }

    proptest! {
        #[test]
        fn real_pauli_sums_are_hermitian((n, terms) in pauli_strategy()) {
            let terms: Vec<PauliTerm> = terms
                .into_iter()
                .filter(|(c, _)| *c != 0.0)
                .map(|(c, w)| PauliTerm::new(Amplitude::new(c, 0.0), w))
                .collect();
            let h = Hamiltonian::from_pauli(n, &terms, &Tolerances::DEFAULT).unwrap();
            for ((i, j), a) in h.entries() {
                prop_assert_eq!(h.entry(j, i), a.conj());
            }
        }

        #[test]
        fn stoquasticize_is_idempotent_and_stoquastic(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6)
        ) {
            let triples: Vec<(usize, usize, Amplitude)> = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
                .iter()
                .zip(vals)
                .map(|(&(i, j), (re, im))| (i, j, Amplitude::new(re, im)))
                .collect();
            let h = Hamiltonian::from_sparse(4, &triples, &Tolerances::DEFAULT).unwrap();
            let s = h.stoquasticize();
            prop_assert!(s.is_stoquastic(0.0));
            prop_assert_eq!(s.stoquasticize(), s);
        }
    }
}
