use lundberg_core::montecarlo::ChunkRunner;
use rayon::prelude::*;

/// Runs chunks on the rayon pool. Results come back in chunk order, so
/// output does not depend on the number of threads.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonRunner;

impl ChunkRunner for RayonRunner {
    fn map_chunks<T, F>(&self, n_chunks: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..n_chunks).into_par_iter().map(f).collect()
    }
}
