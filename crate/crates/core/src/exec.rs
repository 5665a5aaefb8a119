//! Sequential or data-parallel evaluation of independent work items.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon, otherwise `Sequential`.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }

    /// `(0..n).map(f).collect()`, order preserved.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self.effective() {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Parallel sum over `0..n`; the result is summed in index order so it
    /// does not depend on the execution mode.
    pub fn sum_indexed<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.map_indexed(n, f).into_iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = Execution::Sequential.map_indexed(100, |k| (k as f64).sqrt());
        let b = Execution::Parallel.map_indexed(100, |k| (k as f64).sqrt());
        assert_eq!(a, b);
        assert_eq!(
            Execution::Sequential.sum_indexed(1000, |k| 1.0 / (k + 1) as f64),
            Execution::Parallel.sum_indexed(1000, |k| 1.0 / (k + 1) as f64)
        );
    }
}
