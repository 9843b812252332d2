//! Data-parallel inner loops.
//!
//! With the `parallel` feature (the default) index maps fan out over rayon;
//! without it they run sequentially on the calling thread. Results are
//! collected in index order either way, so output never depends on the
//! schedule. `map_indices_seq` is always available so benchmarks can compare
//! the two paths directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indices_seq(n, f)
    }
}

/// Sequential reference implementation of [`map_indices`].
pub fn map_indices_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let a = map_indices(100, |i| i * i);
        let b = map_indices_seq(100, |i| i * i);
        assert_eq!(a, b);
    }
}
