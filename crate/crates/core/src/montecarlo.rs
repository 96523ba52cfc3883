//! Deterministic parallel fan-out of independent replicas.
//!
//! Replica `k` always receives stream `k` of the base seed and results are
//! collected in index order, so the output does not depend on the number of
//! worker threads.

use rayon::prelude::*;

use crate::rng::RandomSource;

/// Runs `job(k, rng_k)` for `k in 0..count` and returns the results in index
/// order. With `workers == Some(n)` a dedicated pool of `n` threads is used;
/// `None` uses the global pool.
pub fn replicate<T, F>(seed: u64, count: usize, workers: Option<usize>, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut RandomSource) -> T + Sync + Send,
{
    let run = || {
        (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = RandomSource::new(seed, k as u64);
                job(k, &mut rng)
            })
            .collect()
    };
    match workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

/// [`replicate`] for fallible jobs; the error of the lowest failing index wins.
pub fn try_replicate<T, E, F>(seed: u64, count: usize, workers: Option<usize>, job: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut RandomSource) -> Result<T, E> + Sync + Send,
{
    replicate(seed, count, workers, job).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_does_not_change_results() {
        let job = |k: usize, rng: &mut RandomSource| (k, rng.next_u64(), rng.uniform());
        let one = replicate(5, 500, Some(1), job);
        let many = replicate(5, 500, Some(7), job);
        assert_eq!(one, many);
        assert!(one.iter().enumerate().all(|(i, r)| r.0 == i));
    }

    #[test]
    fn replica_uses_its_own_stream() {
        let out = replicate(9, 3, None, |_, rng| rng.next_u64());
        for (k, v) in out.iter().enumerate() {
            assert_eq!(*v, RandomSource::new(9, k as u64).next_u64());
        }
    }

    #[test]
    fn first_error_by_index() {
        let r: Result<Vec<usize>, usize> =
            try_replicate(1, 100, Some(4), |k, _| if k % 30 == 29 { Err(k) } else { Ok(k) });
        assert_eq!(r, Err(29));
    }
}
