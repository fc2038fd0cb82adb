//! Execution policy for the data-parallel kernels.
//!
//! With the `parallel` feature (on by default) the kernels fan out over
//! rayon's pool; without it, or with [`Execution::Sequential`], they run on
//! the calling thread. Both paths produce identical results: every reduction
//! is order-independent (min, sum of integers) or merged in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Map `f` over `0..n`, keeping results in index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Map `f` over a slice, keeping results in input order.
    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    pub fn sort_unstable<T: Ord + Send>(self, items: &mut [T]) {
        match self {
            Execution::Sequential => items.sort_unstable(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_sort_unstable(),
        }
    }

    pub fn is_parallel(self) -> bool {
        !matches!(self, Execution::Sequential)
    }
}
