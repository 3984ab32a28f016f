//! Sequential or data-parallel evaluation of independent trials.
//!
//! Results always come back in trial order, and each trial derives its own
//! seed from its index, so the two modes produce identical output. Without
//! the `parallel` feature the parallel mode runs sequentially.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment variable setting the worker count for parallel runs.
pub const THREADS_ENV: &str = "POISON_BOUNDS_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(k) = configured_threads() {
            b = b.num_threads(k);
        }
        b.build().expect("thread pool")
    })
}

/// Worker count requested through [`THREADS_ENV`], if any.
pub fn configured_threads() -> Option<usize> {
    static THREADS: OnceLock<Option<usize>> = OnceLock::new();
    *THREADS.get_or_init(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&k| k >= 1)
    })
}

impl Execution {
    /// `f(0), ..., f(count - 1)` in index order.
    pub fn map<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..count).map(f).collect(),
            Execution::Parallel => parallel_map(count, f),
        }
    }

    /// Like [`Execution::map`], returning the lowest-index error if any.
    pub fn try_map<T, F>(self, count: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(count, f).into_iter().collect()
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    pool().install(|| (0..count).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;
    use rand::Rng;

    #[test]
    fn modes_agree() {
        let f = |i: usize| Seed::new(3).child(i as u64).rng().random::<u64>();
        assert_eq!(Execution::Sequential.map(500, f), Execution::Parallel.map(500, f));
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>> = Execution::Parallel.try_map(100, |i| {
            if i % 30 == 29 {
                Err(crate::error::Error::InvalidParameter(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        assert_eq!(r.unwrap_err().to_string(), "invalid parameter: 29");
    }
}
