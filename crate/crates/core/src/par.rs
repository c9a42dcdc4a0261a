//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers fan work out over the
//! rayon pool; without it, or inside [`with_sequential`], they run on the
//! calling thread. Every helper collects results in index order, so callers
//! that reduce the returned vectors sequentially get results that do not
//! depend on the thread count.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with all helpers on this thread forced onto the sequential path.
pub fn with_sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

fn sequential() -> bool {
    !cfg!(feature = "parallel") || FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Maps `f` over `0..n`, returning results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if sequential() || n < 2 {
        return (0..n).map(f).collect();
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps `f` over a slice, returning results in input order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(items.len(), |i| f(&items[i]))
}

/// Fallible variant of [`map_range`]; the first error in index order wins.
pub fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Maximum of `f(i)` over `0..n` (NaN-free inputs assumed), `None` when empty.
pub fn max_range<F>(n: usize, f: F) -> Option<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let a = map_range(1000, f);
        let b = with_sequential(|| map_range(1000, f));
        assert_eq!(a, b);
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<usize>, usize> =
            try_map_range(10, |i| if i >= 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }
}
