//! Seeded random streams and reductions whose result does not depend on the
//! number of worker threads.
//!
//! Sample `i` of a run always draws from stream `i` of a ChaCha8 generator
//! keyed by the master seed. Samples are grouped into fixed blocks of
//! [`BLOCK_SIZE`]; each block is folded sequentially in sample order and the
//! block results are combined by a fixed pairwise tree. Scheduling therefore
//! never changes a single bit of the output.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Identifier of the uniform-to-normal pipeline, for run manifests.
pub const RNG_TRANSFORM: &str = "chacha8-stream-per-sample/rand_distr-StandardNormal-ziggurat: \
ChaCha8Rng::seed_from_u64(master_seed).set_stream(sample_index); Normal(J, s2) = J + sqrt(s2) * z";

pub const BLOCK_SIZE: usize = 256;

/// Generator for sample `index` of a run keyed by `master_seed`.
pub fn sample_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Maps every block of `0..n` with `map_block` (in parallel) and combines the
/// block results pairwise in index order. Returns `None` when `n == 0`.
pub fn block_reduce<T, F, C>(n: usize, block: usize, map_block: F, combine: C) -> Option<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
    C: Fn(T, T) -> T,
{
    assert!(block > 0, "block size must be positive");
    let n_blocks = n.div_ceil(block);
    let parts: Vec<T> = (0..n_blocks)
        .into_par_iter()
        .map(|b| map_block(b * block..((b + 1) * block).min(n)))
        .collect();
    pairwise(parts, combine)
}

fn pairwise<T, C: Fn(T, T) -> T>(mut level: Vec<T>, combine: C) -> Option<T> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        level = next;
    }
    level.pop()
}

/// Running mean and second central moment of a vector-valued observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Moments {
    pub fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    /// Chan et al. parallel combination.
    pub fn merge(a: Self, b: Self) -> Self {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let (na, nb) = (a.count as f64, b.count as f64);
        let n = na + nb;
        let mut out = Self::new(a.mean.len());
        out.count = a.count + b.count;
        for k in 0..a.mean.len() {
            let delta = b.mean[k] - a.mean[k];
            out.mean[k] = a.mean[k] + delta * nb / n;
            out.m2[k] = a.m2[k] + b.m2[k] + delta * delta * na * nb / n;
        }
        out
    }

    /// Population variance (denominator `count`).
    pub fn variance(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.m2.iter().map(|s| (s / n).max(0.0)).collect()
    }

    pub fn std(&self) -> Vec<f64> {
        self.variance().into_iter().map(f64::sqrt).collect()
    }

    pub fn sem(&self) -> Vec<f64> {
        let root_n = (self.count.max(1) as f64).sqrt();
        self.std().into_iter().map(|s| s / root_n).collect()
    }
}

/// Accumulates `observe(i)` over samples `0..n` with the block/pairwise scheme.
pub fn sample_moments<F>(n: usize, len: usize, observe: F) -> Moments
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    block_reduce(
        n,
        BLOCK_SIZE,
        |range| {
            let mut m = Moments::new(len);
            for i in range {
                m.push(&observe(i));
            }
            m
        },
        Moments::merge,
    )
    .unwrap_or_else(|| Moments::new(len))
}

/// Element-wise sum of `observe(i)` over samples `0..n`, in the same fixed order.
pub fn sample_sum<F>(n: usize, len: usize, observe: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    block_reduce(
        n,
        BLOCK_SIZE,
        |range| {
            let mut acc = vec![0.0; len];
            for i in range {
                for (a, x) in acc.iter_mut().zip(observe(i)) {
                    *a += x;
                }
            }
            acc
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
    .unwrap_or_else(|| vec![0.0; len])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = sample_stream(7, 3).random();
        let b: u64 = sample_stream(7, 3).random();
        let c: u64 = sample_stream(7, 4).random();
        let d: u64 = sample_stream(8, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn moments_match_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let m = sample_moments(xs.len(), 1, |i| vec![xs[i]]);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((m.mean[0] - mean).abs() < 1e-12);
        assert!((m.variance()[0] - var).abs() < 1e-10);
        assert_eq!(m.count, 1000);
    }

    #[test]
    fn reduction_is_independent_of_thread_count() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    sample_moments(5000, 2, |i| {
                        let mut rng = sample_stream(11, i as u64);
                        vec![rng.random::<f64>(), rng.random::<f64>().powi(3)]
                    })
                })
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one, four);
    }

    #[test]
    fn empty_reduction() {
        assert_eq!(sample_sum(0, 3, |_| vec![1.0; 3]), vec![0.0; 3]);
        assert!(block_reduce(0, 4, |_| 1, |a, b| a + b).is_none());
    }
}
