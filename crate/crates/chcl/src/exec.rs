use chcl_core::Executor;
use rayon::prelude::*;

/// Rayon-backed [`Executor`]; results come back in index order.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `workers = 0` uses one thread per logical core.
    pub fn new(workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        Self { pool }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..len).into_par_iter().map(f).collect())
    }
}
