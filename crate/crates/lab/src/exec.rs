use ergodic_core::Executor;
use rayon::prelude::*;

/// Work-stealing executor over trajectory indices.
///
/// `collect` on an indexed parallel iterator keeps index order, so every
/// reduction downstream sees the same sequence regardless of thread count.
#[derive(Clone, Copy, Debug, Default)]
pub struct Parallel;

impl Executor for Parallel {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }
}
