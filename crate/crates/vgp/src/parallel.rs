use rayon::prelude::*;
use rayon::ThreadPool;
use vgp_core::expansion::StartMap;

/// Runs per-start jobs on a rayon pool. Results come back in start order,
/// so reductions over them do not depend on scheduling.
pub struct RayonMap {
    pool: ThreadPool,
}

impl RayonMap {
    /// `threads = 0` lets rayon pick the worker count.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        Self { pool }
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl StartMap for RayonMap {
    fn map_starts<T: Send>(&self, n: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        self.pool.install(|| (0..n).into_par_iter().map(job).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vgp_core::expansion::{partition_function_series_with, Sequential, SeriesOptions};
    use vgp_core::{decompose_pmr, Amplitude, Hamiltonian, Tolerances};

    #[test]
    fn matches_sequential_bit_for_bit() {
        let h = Hamiltonian::from_sparse(
            4,
            &[
                (0, 1, Amplitude::new(0.3, 0.4)),
                (1, 2, Amplitude::new(-0.5, 0.0)),
                (2, 3, Amplitude::new(0.1, -0.2)),
                (0, 3, Amplitude::new(0.7, 0.0)),
                (1, 1, Amplitude::new(0.2, 0.0)),
            ],
            &Tolerances::DEFAULT,
        )
        .unwrap();
        let p = decompose_pmr(&h);
        let opts = SeriesOptions::with_rel_tol(1e-10);
        let a = partition_function_series_with(&p, 1.3, &opts, &Sequential).unwrap();
        let b = partition_function_series_with(&p, 1.3, &opts, &RayonMap::new(3)).unwrap();
        assert_eq!(a, b);
    }
}
