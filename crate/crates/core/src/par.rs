//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in index order, so callers see the same
//! output whichever execution mode runs. With the `parallel` feature off,
//! [`Execution::Parallel`] silently degrades to sequential iteration.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Mode selected by the build: parallel when the feature is on.
    pub fn default_for_build() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over an integer range, collecting in order.
pub fn map_range<T, F>(exec: Execution, range: Range<i64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(i64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => range.into_par_iter().map(f).collect(),
        _ => range.map(f).collect(),
    }
}

/// Maps `f` over a slice, collecting in order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `f` with at most `threads` workers. `None` or a sequential build
/// just calls `f`.
pub fn install<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

/// Neumaier-compensated sum in input order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let a = map_range(Execution::Sequential, -5..200, |n| n * n - 3);
        let b = map_range(Execution::Parallel, -5..200, |n| n * n - 3);
        assert_eq!(a, b);
        assert_eq!(a[0], 22);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let vals: Vec<f64> =
            std::iter::once(1e16).chain(std::iter::repeat_n(1.0, 1000)).chain(std::iter::once(-1e16)).collect();
        assert_eq!(compensated_sum(vals.iter().copied()), 1000.0);
    }
}
