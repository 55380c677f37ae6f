//! Deterministic parallel helpers.
//!
//! Per-node work writes disjoint output slots, so it is independent of the
//! worker count. Reductions sum fixed-size chunks and then combine the chunk
//! partials sequentially in chunk order, so floating-point results do not
//! depend on how rayon schedules the chunks either.

use std::ops::Range;

use rayon::prelude::*;

/// Nodes per reduction chunk.
pub const REDUCTION_CHUNK: usize = 1024;

/// Sums `width` accumulators over `0..len`. `f` adds the contribution of a
/// contiguous range into its accumulator slice.
pub fn ordered_sum<F>(len: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(Range<usize>, &mut [f64]) + Sync,
{
    let chunks = len.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            let start = c * REDUCTION_CHUNK;
            f(start..(start + REDUCTION_CHUNK).min(len), &mut acc);
            acc
        })
        .collect();
    let mut total = vec![0.0; width];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// Scalar form of [`ordered_sum`].
pub fn ordered_sum_scalar<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    ordered_sum(len, 1, |range, acc| {
        for k in range {
            acc[0] += f(k);
        }
    })[0]
}

/// Runs `op` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_independent_of_workers() {
        let len = 10_000;
        let term = |k: usize| ((k as f64) * 0.37).sin() / (1.0 + k as f64);
        let one = with_threads(1, || ordered_sum_scalar(len, term));
        let four = with_threads(4, || ordered_sum_scalar(len, term));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn empty_range() {
        assert_eq!(ordered_sum(0, 3, |_, _| {}), vec![0.0; 3]);
    }
}
