//! Pluggable execution of independent tasks.
//!
//! Assembly and Monte Carlo estimation are expressed as maps over
//! independent indices. The runner decides how to schedule them; results
//! always come back in index order so downstream reductions are
//! deterministic regardless of the worker count.

use alloc::vec::Vec;

pub trait TaskRunner: Sync {
    /// Evaluate `f(0..n)` and return the results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    fn workers(&self) -> usize {
        1
    }
}

/// Runs every task on the calling thread, in order.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl TaskRunner for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
