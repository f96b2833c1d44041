// SPDX-License-Identifier: Apache-2.0

//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items are spread over a rayon pool of a
//! fixed size; without it, or with one job, they run in order on the
//! calling thread. Results come back in input order either way.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone)]
pub enum Executor {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel(Arc<rayon::ThreadPool>),
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Executor({} jobs)", self.jobs())
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::with_jobs(None)
    }
}

/// Number of hardware threads, at least 1.
pub fn available_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Executor {
    /// `None` means one job per hardware thread. Builds without the
    /// `parallel` feature always run sequentially.
    pub fn with_jobs(jobs: Option<usize>) -> Self {
        let jobs = jobs.unwrap_or_else(available_jobs).max(1);
        if jobs == 1 {
            return Self::Sequential;
        }
        #[cfg(feature = "parallel")]
        {
            match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                Ok(pool) => Self::Parallel(Arc::new(pool)),
                Err(_) => Self::Sequential,
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self::Sequential
        }
    }

    pub fn jobs(&self) -> usize {
        match self {
            Self::Sequential => 1,
            #[cfg(feature = "parallel")]
            Self::Parallel(pool) => pool.current_num_threads(),
        }
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Self::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Self::Parallel(pool) => pool.install(|| items.par_iter().map(f).collect()),
        }
    }
}
