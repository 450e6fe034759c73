//! Execution strategy for the data-parallel scans (triple enumeration,
//! ledger rows, sample grids, instance batches).
//!
//! With the `parallel` feature the default strategy runs on rayon's global
//! pool; without it everything falls back to plain iterators. Results are
//! always collected in index order, so output does not depend on the
//! strategy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum Strategy {
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}


impl Strategy {
    /// Every strategy compiled into this build.
    pub const AVAILABLE: &'static [Strategy] = &[
        Strategy::Sequential,
        #[cfg(feature = "parallel")]
        Strategy::Parallel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Strategy::Parallel => "parallel",
        }
    }
}

/// Map `f` over `0..n`, keeping index order.
pub fn map_range<T, F>(strategy: Strategy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match strategy {
        Strategy::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Strategy::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Map `f` over `0..n` and concatenate the produced vectors in index order.
pub fn flat_map_range<T, F>(strategy: Strategy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    match strategy {
        Strategy::Sequential => (0..n).flat_map(f).collect(),
        #[cfg(feature = "parallel")]
        Strategy::Parallel => (0..n).into_par_iter().flat_map_iter(f).collect(),
    }
}

/// Map `f` over a slice, keeping order.
pub fn map_slice<'a, S, T, F>(strategy: Strategy, items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    match strategy {
        Strategy::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Strategy::Parallel => items.par_iter().map(f).collect(),
    }
}
