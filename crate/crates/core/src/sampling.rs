//! Deterministic batched sampling.
//!
//! Work is cut into fixed-size batches; batch `b` draws from a ChaCha stream
//! seeded by `(seed, b)`. Results are concatenated in batch order, so they do
//! not depend on how many threads processed the batches.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::par;

pub(crate) const BATCH: usize = 256;

/// Generator for batch `batch` of a run seeded with `seed`.
pub(crate) fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64 + 1);
    rng
}

/// Draws `count` items with `draw`, batch-parallel and order-stable.
pub(crate) fn sample<T, F>(seed: u64, count: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    let batches = count.div_ceil(BATCH);
    let chunks: Vec<Vec<T>> = par::map_collect(batches, |b| {
        let mut rng = batch_rng(seed, b);
        let here = BATCH.min(count - b * BATCH);
        (0..here).map(|_| draw(&mut rng)).collect()
    });
    chunks.into_iter().flatten().collect()
}
