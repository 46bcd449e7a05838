//! Thread-pool executor for the pipeline stages.

use crisp_core::pipeline::Executor;
use rayon::prelude::*;

/// Environment variable read for the worker count when no flag is given.
pub const WORKERS_ENV: &str = "CRISP_WORKERS";

/// Runs work items on a fixed-size rayon pool; results keep input order.
pub struct PoolExecutor {
    pool: rayon::ThreadPool,
}

impl PoolExecutor {
    pub fn new(workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .expect("thread pool builds");
        PoolExecutor { pool }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        self.pool
            .install(|| items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect())
    }
}

/// Flag value, else the environment variable, else the available
/// parallelism.
pub fn worker_count(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
