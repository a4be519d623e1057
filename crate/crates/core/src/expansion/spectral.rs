//! Exact `tr exp(-beta H)` by full diagonalization.

use alloc::format;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::math::{exp, ln};

/// Largest dimension accepted by the spectral oracle.
pub const ORACLE_DIM_CAP: usize = 4096;

fn eigenvalues(h: &Hamiltonian) -> Result<alloc::vec::Vec<f64>> {
    let n = h.dim();
    if n > ORACLE_DIM_CAP {
        return Err(Error::Dimension(format!("dimension {n} exceeds the oracle cap {ORACLE_DIM_CAP}")));
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for ((i, j), a) in h.entries() {
        m[(i, j)] = a;
    }
    Ok(SymmetricEigen::new(m).eigenvalues.iter().copied().collect())
}

/// `ln tr exp(-beta H)`, finite even when `Z` itself overflows.
pub fn ln_partition_function_exact(h: &Hamiltonian, beta: f64) -> Result<f64> {
    let ev = eigenvalues(h)?;
    let low = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = ev.iter().map(|&l| exp(-beta * (l - low))).sum();
    Ok(-beta * low + ln(s))
}

/// `tr exp(-beta H)`.
pub fn partition_function_exact(h: &Hamiltonian, beta: f64) -> Result<f64> {
    ln_partition_function_exact(h, beta).map(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Amplitude, Tolerances};
    use crate::math::sqrt;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    #[test]
    fn closed_forms() {
        let t = Tolerances::DEFAULT;
        let d = Hamiltonian::from_sparse(2, &[(0, 0, c(0.3, 0.0)), (1, 1, c(-1.2, 0.0))], &t).unwrap();
        let z = partition_function_exact(&d, 0.7).unwrap();
        assert!((z - (exp(-0.21) + exp(0.84))).abs() < 1e-13);
        let mx = Hamiltonian::from_sparse(2, &[(0, 1, c(-1.0, 0.0))], &t).unwrap();
        assert!((partition_function_exact(&mx, 1.0).unwrap() - 3.086_161_269_630_488).abs() < 1e-13);
        let tri =
            Hamiltonian::from_sparse(3, &[(0, 1, c(0.0, 1.0)), (0, 2, c(1.0, 0.0)), (1, 2, c(1.0, 0.0))], &t).unwrap();
        let z = partition_function_exact(&tri, 1.0).unwrap();
        assert!((z - (1.0 + 2.0 * libm::cosh(sqrt(3.0)))).abs() < 1e-12);
    }

    #[test]
    fn large_beta_log_form() {
        let t = Tolerances::DEFAULT;
        let d = Hamiltonian::from_sparse(1, &[(0, 0, c(-10.0, 0.0))], &t).unwrap();
        assert!((ln_partition_function_exact(&d, 100.0).unwrap() - 1000.0).abs() < 1e-12);
    }
}
