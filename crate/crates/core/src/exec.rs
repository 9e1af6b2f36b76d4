//! Trajectory-level execution strategy.

use alloc::vec::Vec;

/// Maps a function over trajectory indices, returning results in index order.
///
/// Implementations may evaluate indices in any order or concurrently, but the
/// output order is always `0..count`, which keeps every downstream reduction
/// independent of scheduling.
pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every index on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
