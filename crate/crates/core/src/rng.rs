//! Named random substreams derived from a single 64-bit seed.
//!
//! Every consumer of randomness asks for `(stream, iteration, index)`; the resulting ChaCha8
//! generators are independent and do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Clifford,
    Measurement,
    MonteCarlo,
    Init,
    Dataset,
    Shuffle,
}

impl Stream {
    fn code(self) -> u64 {
        match self {
            Stream::Clifford => 1,
            Stream::Measurement => 2,
            Stream::MonteCarlo => 3,
            Stream::Init => 4,
            Stream::Dataset => 5,
            Stream::Shuffle => 6,
        }
    }
}

/// Generator for `stream` at a given iteration and sub-task index.
///
/// `iteration` must fit in 32 bits and `index` in 24 bits.
pub fn substream(seed: u64, stream: Stream, iteration: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(iteration < (1 << 32) && index < (1 << 24));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream.code() << 56) | (iteration << 24) | index);
    rng
}
