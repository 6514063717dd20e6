//! Seeded random streams with deterministic substreams.
//!
//! Work is cut into fixed-size chunks, each drawing from its own ChaCha
//! substream. Chunk results come back in chunk order, so any reduction done
//! in that order is bit-identical regardless of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Events handled by one chunk.
pub const CHUNK_EVENTS: u64 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Independent child stream identified by `label`.
    pub fn fork(&self, label: u64) -> RandomStream {
        RandomStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x5EED))),
        }
    }

    fn chunk(&self, index: u64) -> RandomStream {
        RandomStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id.wrapping_add(splitmix64(index))),
        }
    }
}

/// Runs `work(rng, count)` over `n` events split into fixed chunks and returns
/// the per-chunk results in chunk order.
pub fn run_chunked<T, F>(stream: &RandomStream, n: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK_EVENTS);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_EVENTS.min(n - c * CHUNK_EVENTS);
            let mut rng = stream.chunk(c).rng();
            work(&mut rng, count)
        })
        .collect()
}
