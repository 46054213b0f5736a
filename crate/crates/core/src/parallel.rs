//! Execution strategy for the data-parallel inner loops.
//!
//! Every hot loop in the crate (pairwise order checks, coset projections,
//! orbit neighbour computation, Lang tables) goes through [`Execution`], so a
//! caller can pin a computation to one thread or let rayon spread it. Results
//! are always collected in index order, so output does not depend on the
//! number of workers.

/// How a batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    /// Uses the rayon global pool. Falls back to sequential execution when the
    /// crate is built without the `parallel` feature.
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
    /// Evaluates `f` on `0..n` and returns the results in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Index of the first (lowest) position where `pred` holds, if any.
    pub fn position_first<F>(self, n: usize, pred: F) -> Option<usize>
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().position_first(pred)
            }
            _ => (0..n).position(pred),
        }
    }

    /// Whether `pred` holds for every index in `0..n`.
    pub fn all<F>(self, n: usize, pred: F) -> bool
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        self.position_first(n, |i| !pred(i)).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        let seq = Execution::Sequential.map_range(1000, |i| i * i % 97);
        let par = Execution::Parallel.map_range(1000, |i| i * i % 97);
        assert_eq!(seq, par);
        assert_eq!(
            Execution::Sequential.position_first(1000, |i| i > 10 && i % 7 == 0),
            Execution::Parallel.position_first(1000, |i| i > 10 && i % 7 == 0)
        );
        assert!(Execution::Parallel.all(50, |i| i < 50));
    }
}
