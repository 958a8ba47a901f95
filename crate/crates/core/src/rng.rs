//! Named random streams derived from one master seed.
//!
//! Every consumer of randomness gets its own ChaCha stream so that, for
//! example, evaluating an extra inference scheme never perturbs training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::inference::Scheme;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Split,
    Shuffle,
    Covering,
    Genetic,
    Generator,
    TieBreak(Scheme),
    Grid,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Split => 1,
            Stream::Shuffle => 2,
            Stream::Covering => 3,
            Stream::Genetic => 4,
            Stream::Generator => 5,
            Stream::TieBreak(Scheme::Vote) => 16,
            Stream::TieBreak(Scheme::Swin) => 17,
            Stream::TieBreak(Scheme::Ds) => 18,
            Stream::Grid => 32,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
