//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon when
//! asked for [`Execution::Parallel`]; without it every call runs in order on
//! the current thread. Results always come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
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
    /// Whether work will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Like [`map`] but stops at an error. With parallel execution the reported
/// error is the one with the smallest index, so output is deterministic.
pub fn try_map<T, R, E, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let results: Vec<Result<R, E>> = items.par_iter().map(f).collect();
        return results.into_iter().collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Applies `f` to every index in `0..n` and concatenates the outputs in order.
pub fn flat_map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> Vec<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().flat_map_iter(f).collect();
    }
    let _ = exec;
    (0..n).flat_map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(map(exec, &xs, |x| x * 2), xs.iter().map(|x| x * 2).collect::<Vec<_>>());
            let flat = flat_map_range(exec, 4, |i| vec![i; i]);
            assert_eq!(flat, vec![1, 2, 2, 3, 3, 3]);
        }
    }

    #[test]
    fn first_error_wins() {
        let xs: Vec<i32> = (0..500).collect();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let r: Result<Vec<i32>, i32> =
                try_map(exec, &xs, |&x| if x % 100 == 37 { Err(x) } else { Ok(x) });
            assert_eq!(r, Err(37));
        }
    }
}
