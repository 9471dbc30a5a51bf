//! Ordered fan-out over independent work items.
//!
//! Every helper here returns results in index order, whatever the worker
//! count, so callers can rely on bit-identical aggregation. Without the
//! `parallel` feature everything runs on the calling thread.

/// How many workers a batch may use. `1` always means the plain sequential
/// iterator path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(usize);

impl Workers {
    pub const SEQUENTIAL: Workers = Workers(1);

    pub fn new(count: usize) -> Self {
        Workers(count.max(1))
    }

    /// All cores the process may use.
    pub fn available() -> Self {
        Workers(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn count(self) -> usize {
        self.0
    }

    pub fn is_sequential(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::available()
    }
}

/// Apply `f` to `0..len` and collect in index order.
///
/// Runs inside a dedicated pool sized to `workers`, so nested calls (slot
/// exponentials inside trials) stay within the budget.
pub fn map_indexed<T, F>(len: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers.is_sequential() || len <= 1 {
        return (0..len).map(f).collect();
    }
    parallel_map(len, workers, f)
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(len: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.count())
        .build()
    {
        Ok(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
        Err(_) => (0..len).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(len: usize, _workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Map over `0..len` on the ambient rayon pool (if any). Used for inner
/// loops such as per-slot exponentials, which inherit the pool of the
/// caller instead of creating their own.
pub fn map_ambient<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if len > 1 && rayon::current_num_threads() > 1 {
            return (0..len).into_par_iter().map(&f).collect();
        }
    }
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_index_ordered() {
        for w in [1, 2, 4] {
            let out = map_indexed(100, Workers::new(w), |i| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn zero_workers_clamps_to_one() {
        assert_eq!(Workers::new(0).count(), 1);
        assert!(Workers::new(0).is_sequential());
    }
}
