//! Seed splitting.
//!
//! Every random stream in the crate is derived from a `u64` master seed:
//!
//! * replicate `i` of an experiment uses `replicate_seed(master, i)`;
//! * inside one Harris system, each edge, site and start offset draws from
//!   `ChaCha8Rng::seed_from_u64(system_seed)` with a distinct ChaCha stream
//!   number (see [`Stream`]), so the realization does not depend on the order
//!   in which components are generated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an ordered list of words into one seed.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |h, &w| splitmix64(h ^ w))
}

/// Seed of replicate `index` under `master`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    mix(&[master, index])
}

/// Stream families inside one system seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Edge(usize),
    Train(usize),
    StartOffset(usize),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Edge(e) => (1 << 48) | e as u64,
            Stream::Train(s) => (2 << 48) | s as u64,
            Stream::StartOffset(s) => (3 << 48) | s as u64,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
