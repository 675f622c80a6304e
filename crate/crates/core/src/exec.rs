//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop splits its work into a fixed sequence of chunks and
//! combines the per-chunk results in chunk order, so results are identical
//! under `Sequential`, `Parallel`, and any thread count. Without the
//! `parallel` feature, `Parallel` runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Applies `f` to fixed-size chunks of `data` and returns per-chunk results
/// in chunk order.
pub fn map_chunks<T, R, F>(exec: Execution, data: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = data.len().div_ceil(chunk);
    map_indexed(exec, n_chunks, |c| {
        let start = c * chunk;
        let end = (start + chunk).min(data.len());
        f(start, &data[start..end])
    })
}

/// Installs a global thread pool sized by `SPECTRA_THREADS` if set.
/// Returns the thread count in effect.
pub fn configure_threads_from_env() -> usize {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = std::env::var("SPECTRA_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_results_are_ordered() {
        let data: Vec<u32> = (0..1000).collect();
        let seq = map_chunks(Execution::Sequential, &data, 64, |s, c| (s, c.iter().sum::<u32>()));
        let par = map_chunks(Execution::Parallel, &data, 64, |s, c| (s, c.iter().sum::<u32>()));
        assert_eq!(seq, par);
        assert_eq!(seq.len(), 16);
        assert_eq!(seq.iter().map(|x| x.1).sum::<u32>(), 499_500);
    }
}
