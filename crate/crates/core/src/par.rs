//! Execution strategy for the data-parallel loops (sweeps, trial batches,
//! per-molecule updates, seed ensembles).
//!
//! With the `parallel` feature the [`Execution::Parallel`] strategy runs on
//! the rayon global pool; without it every strategy runs sequentially.
//! Work items never share RNG state, so both strategies give bit-identical
//! results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether this strategy actually fans out in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `(0..n).map(f).collect()`, preserving index order.
    pub fn map_indices<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Mutates every element of `items` and collects one result per element,
    /// in element order.
    pub fn map_mut<T, R, F>(self, items: &mut [T], f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, &mut T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items
                .par_iter_mut()
                .with_min_len(256)
                .enumerate()
                .map(|(i, x)| f(i, x))
                .collect();
        }
        items.iter_mut().enumerate().map(|(i, x)| f(i, x)).collect()
    }

    /// Applies `f` to every element of `items` in place.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            items
                .par_iter_mut()
                .with_min_len(256)
                .enumerate()
                .for_each(|(i, x)| f(i, x));
            return;
        }
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}
