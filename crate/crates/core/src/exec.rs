//! Data-parallel execution with a sequential fallback.
//!
//! Fan-out work (game rollouts, board rendering, per-direction swipe
//! optimization) is expressed as a pure function of an index; each index
//! derives its own RNG stream, so the result vector is bit-identical whether
//! it was produced by rayon or by a plain loop. The `parallel` feature gates
//! the rayon dependency; [`ExecMode::resolve`] degrades to sequential when it
//! is compiled out.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl ExecMode {
    /// Whether this build can run parallel at all.
    pub fn parallel_compiled() -> bool {
        cfg!(feature = "parallel")
    }

    /// Parallel if requested and compiled in, sequential otherwise.
    pub fn resolve(want_parallel: bool) -> ExecMode {
        if want_parallel && Self::parallel_compiled() {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Evaluate `f(0..n)` and collect results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_preserve_order() {
        let seq = map_indexed(ExecMode::Sequential, 100, |i| i * i);
        let par = map_indexed(ExecMode::resolve(true), 100, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[10], 100);
    }
}
