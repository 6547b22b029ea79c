//! Seeded, shard-parallel sampling.
//!
//! Draws are produced in fixed-size blocks. Block `b` gets its own ChaCha8
//! stream (`seed`, stream `b`), so the output depends only on the seed and
//! the requested count, never on the number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::patchwork::PatchworkCopula;

/// Draws per block.
pub const BLOCK_SIZE: usize = 1 << 14;

/// Anything that produces points of the unit cube.
pub trait CopulaSampler {
    fn dim(&self) -> usize;

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
}

impl CopulaSampler for PatchworkCopula {
    fn dim(&self) -> usize {
        PatchworkCopula::dim(self)
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        PatchworkCopula::sample_into(self, rng, out);
    }
}

/// The random stream for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `count` draws, row-major (`count x dim`).
pub fn draw<S: CopulaSampler + Sync>(sampler: &S, count: usize, seed: u64) -> Vec<f64> {
    let d = sampler.dim();
    let mut out = vec![0.0; count * d];
    out.par_chunks_mut(BLOCK_SIZE * d).enumerate().for_each(|(b, chunk)| {
        let mut rng = block_rng(seed, b as u64);
        for row in chunk.chunks_exact_mut(d) {
            sampler.sample_into(&mut rng, row);
        }
    });
    out
}

/// Runs `map` over every draw and keeps one value per draw, in draw order.
/// Avoids materializing the points when only a summary is needed.
pub fn draw_map<S, F>(sampler: &S, count: usize, seed: u64, map: F) -> Vec<f64>
where
    S: CopulaSampler + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = sampler.dim();
    let mut out = vec![0.0; count];
    out.par_chunks_mut(BLOCK_SIZE).enumerate().for_each(|(b, chunk)| {
        let mut rng = block_rng(seed, b as u64);
        let mut point = vec![0.0; d];
        for slot in chunk {
            sampler.sample_into(&mut rng, &mut point);
            *slot = map(&point);
        }
    });
    out
}
