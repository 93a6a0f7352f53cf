//! Data-parallel map over independent jobs, with a sequential fallback.

/// How independent jobs (seeds, trials) are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the global rayon pool when `workers` is `None`.
    #[default]
    Parallel,
    Workers(usize),
}

impl Execution {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            None => Execution::Parallel,
            Some(0) | Some(1) => Execution::Sequential,
            Some(n) => Execution::Workers(n),
        }
    }

    /// Applies `f` to every item; output order follows input order regardless of scheduling.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.into_iter().map(f).collect(),
            Execution::Parallel => parallel::map(items, f, None),
            Execution::Workers(n) => parallel::map(items, f, Some(n)),
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.map((0..n).collect(), f)
    }
}

#[cfg(feature = "parallel")]
mod parallel {
    use rayon::prelude::*;

    pub fn map<T, R, F>(items: Vec<T>, f: F, workers: Option<usize>) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        match workers {
            None => items.into_par_iter().map(f).collect(),
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| items.into_par_iter().map(f).collect()),
                Err(_) => items.into_iter().map(f).collect(),
            },
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    pub fn map<T, R, F>(items: Vec<T>, f: F, _workers: Option<usize>) -> Vec<R>
    where
        F: Fn(T) -> R,
    {
        items.into_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = Execution::Sequential.map_range(100, |i| i * i);
        for e in [Execution::Parallel, Execution::Workers(3)] {
            assert_eq!(e.map_range(100, |i| i * i), seq);
        }
    }

    #[test]
    fn worker_flag() {
        assert_eq!(Execution::from_workers(Some(1)), Execution::Sequential);
        assert_eq!(Execution::from_workers(Some(4)), Execution::Workers(4));
        assert_eq!(Execution::from_workers(None), Execution::Parallel);
    }
}
