//! Parallel sample generation with per-sample streams.

use rayon::prelude::*;

use crate::rng::RngStream;

/// Draws `n` samples, sample `i` from stream `i` of `seed`. Order is preserved,
/// so any later reduction is independent of the worker count.
pub fn par_samples<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64);
            f(&mut rng)
        })
        .collect()
}

/// Fallible variant of [`par_samples`]; the first error in index order wins.
pub fn try_par_samples<T, E, F>(seed: u64, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&mut RngStream) -> Result<T, E> + Sync + Send,
{
    par_samples(seed, n, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn independent_of_pool_size() {
        let draw = |r: &mut RngStream| r.next_u64();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| par_samples(9, 1000, draw));
        let b = four.install(|| par_samples(9, 1000, draw));
        assert_eq!(a, b);
        assert_eq!(a[17], RngStream::new(9, 17).next_u64());
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<u32>, usize> = try_par_samples(1, 10, |rng| {
            if rng.stream_index() == 3 {
                Err(3)
            } else {
                Ok(0)
            }
        });
        assert_eq!(r, Err(3));
    }
}
