//! JSON documents for Hamiltonians.
//!
//! Three input forms are accepted, distinguished by the `format` field:
//!
//! ```json
//! {"format": "dense",  "matrix": [[[re, im], ...], ...]}
//! {"format": "sparse", "dim": N, "entries": [[i, j, re, im], ...]}
//! {"format": "pauli",  "n_qubits": n, "terms": [{"coeff": [re, im], "word": "XZIY"}]}
//! ```
//!
//! Sparse input may list only the upper triangle; the lower one is inferred
//! by conjugation. Any extra `metadata` object is ignored on input.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use vgp_core::{Amplitude, Hamiltonian, PauliTerm, Tolerances};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliTermDoc {
    pub coeff: [f64; 2],
    pub word: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum HamiltonianDoc {
    Dense {
        matrix: Vec<Vec<[f64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<Value>,
    },
    Sparse {
        dim: usize,
        entries: Vec<(usize, usize, f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<Value>,
    },
    Pauli {
        n_qubits: u32,
        terms: Vec<PauliTermDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<Value>,
    },
}

impl HamiltonianDoc {
    pub fn to_hamiltonian(&self, tol: &Tolerances) -> Result<Hamiltonian, CliError> {
        let h = match self {
            HamiltonianDoc::Dense { matrix, .. } => {
                let rows: Vec<Vec<Amplitude>> =
                    matrix.iter().map(|r| r.iter().map(|&[re, im]| Amplitude::new(re, im)).collect()).collect();
                Hamiltonian::from_dense(&rows, tol)?
            }
            HamiltonianDoc::Sparse { dim, entries, .. } => {
                let triples: Vec<(usize, usize, Amplitude)> =
                    entries.iter().map(|&(i, j, re, im)| (i, j, Amplitude::new(re, im))).collect();
                Hamiltonian::from_sparse(*dim, &triples, tol)?
            }
            HamiltonianDoc::Pauli { n_qubits, terms, .. } => {
                let terms: Vec<PauliTerm> = terms
                    .iter()
                    .map(|t| PauliTerm::new(Amplitude::new(t.coeff[0], t.coeff[1]), t.word.clone()))
                    .collect();
                Hamiltonian::from_pauli(*n_qubits, &terms, tol)?
            }
        };
        Ok(h)
    }

    /// Sparse document holding the diagonal and the upper triangle.
    pub fn sparse_from(h: &Hamiltonian, metadata: Option<Value>) -> Self {
        let mut entries: Vec<(usize, usize, f64, f64)> =
            h.entries().filter(|&((i, j), _)| i <= j).map(|((i, j), a)| (i, j, a.re, a.im)).collect();
        entries.sort_by_key(|e| (e.0, e.1));
        HamiltonianDoc::Sparse { dim: h.dim(), entries, metadata }
    }
}

/// Parses and validates a Hamiltonian document.
pub fn load_hamiltonian(text: &str, tol: &Tolerances) -> Result<Hamiltonian, CliError> {
    let doc: HamiltonianDoc = serde_json::from_str(text)?;
    doc.to_hamiltonian(tol)
}
