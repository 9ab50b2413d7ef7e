//! Reproducible random streams and deterministic parallel ensembles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A `(seed, stream_id)` pair naming one independent ChaCha8 stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream of replicate `index` within ensemble `tag`.
    pub fn replicate(seed: u64, tag: u32, index: u32) -> Self {
        RngStream::new(seed, ((tag as u64) << 32) | index as u64)
    }
}

/// Ensemble tags; distinct tags give independent ensembles under one seed.
pub mod tags {
    pub const SAMPLE: u32 = 1;
    pub const LHS: u32 = 2;
    pub const RHS: u32 = 3;
    pub const PALM: u32 = 4;
    pub const SHIFTED: u32 = 5;
    pub const WINDOW_AVERAGE: u32 = 6;
    pub const NETWORK: u32 = 7;
}

/// Runs `f` on replicates `0..n`, each with its own stream, in parallel.
/// The output order is the replicate order, so results do not depend on
/// the number of worker threads.
pub fn ensemble<T, F>(seed: u64, tag: u32, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::replicate(seed, tag, i as u32).rng();
            f(&mut rng, i)
        })
        .collect()
}
