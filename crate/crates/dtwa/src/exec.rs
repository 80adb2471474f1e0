//! Thread-pool shard executor.

use rayon::prelude::*;
use rayon::ThreadPool;

use dtwa_core::ensemble::ShardExecutor;

use crate::Result;

/// Runs shards on a dedicated rayon pool. Results come back in shard
/// order, so the worker count never changes the output.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    /// `workers = 0` uses one thread per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl ShardExecutor for RayonExecutor {
    fn map_shards<T, F>(&self, n_shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n_shards).into_par_iter().map(&f).collect())
    }
}
