use rayon::prelude::*;
use xfer_core::Executor;

/// Runs work units on a rayon pool. Results come back in index order, so
/// output never depends on the thread count.
pub struct Threads {
    pool: rayon::ThreadPool,
}

impl Threads {
    /// `threads == 0` uses one worker per core.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        Threads { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Threads {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_index_order() {
        let t = Threads::new(4);
        assert_eq!(t.threads(), 4);
        let v = t.map_indexed(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
