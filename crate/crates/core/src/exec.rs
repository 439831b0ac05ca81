//! Sequential or data-parallel evaluation of independent jobs.
//!
//! Results are always collected in job order, so reductions over them are
//! identical whichever mode ran them.

/// How independent jobs (candidates, directions, replications) are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon global pool when the `parallel` feature is enabled,
    /// otherwise runs sequentially.
    #[default]
    Parallel,
}

impl Execution {
    /// Evaluates `f(0..len)` and returns results in index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..len).map(f).collect(),
            Execution::Parallel => parallel_map(len, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}
