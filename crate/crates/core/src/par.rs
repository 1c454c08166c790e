//! Deterministic parallel map over trial indices.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluate `f(0..count)` on `jobs` worker threads and return the results in
/// index order. `jobs <= 1` runs on the calling thread. Each trial must draw
/// its randomness from its own index, so the output does not depend on
/// `jobs`.
pub fn map_indexed<T, F>(jobs: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs <= 1 {
        return Ok((0..count).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_jobs() {
        let a = map_indexed(1, 100, |i| i * i).unwrap();
        let b = map_indexed(4, 100, |i| i * i).unwrap();
        assert_eq!(a, b);
    }
}
