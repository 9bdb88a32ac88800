//! Pluggable execution of independent work units.

use alloc::vec::Vec;

/// Runs `n` independent, index-addressed work units and returns their
/// results in index order.
///
/// Implementations may run units concurrently, but the output must not depend
/// on scheduling: every unit derives its own randomness from its index, and
/// results are always assembled in ascending index order.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every unit on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
