//! Seed derivation. A run's master seed fans out into independent named
//! streams, one per consumer and index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    TrainEnv,
    PolicyInit,
    ActionSampling,
    EvalEnv,
    EvalActions,
    Trace,
    Bootstrap,
    Minibatch,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::TrainEnv => 1,
            Stream::PolicyInit => 2,
            Stream::ActionSampling => 3,
            Stream::EvalEnv => 4,
            Stream::EvalActions => 5,
            Stream::Trace => 6,
            Stream::Bootstrap => 7,
            Stream::Minibatch => 8,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream.tag()) ^ index)
}

pub fn stream_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}
