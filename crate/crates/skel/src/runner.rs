use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use skel_core::runner::TaskRunner;

/// Task runner backed by a dedicated rayon pool. Results come back in
/// index order, so reductions downstream do not depend on the pool size.
pub struct RayonRunner {
    pool: ThreadPool,
    workers: usize,
}

impl RayonRunner {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool, workers })
    }
}

impl TaskRunner for RayonRunner {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    fn workers(&self) -> usize {
        self.workers
    }
}
