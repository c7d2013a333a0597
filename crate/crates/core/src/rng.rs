//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a stream addressed by
//! `(run seed, purpose, stage, index)`. Two streams with different keys are
//! independent, and a stream's output depends only on its key, so work can be
//! split across any number of threads in any order and still reproduce the
//! same numbers bit for bit.
//!
//! The generator is ChaCha8: the key selects the ChaCha key and stream id, the
//! block counter does the rest.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream even
/// when the other key components coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Kernel perturbations and generative-model queries while building
    /// regression targets.
    Targets,
    /// Policy rollouts.
    Rollout,
    /// Transition draws inside the grid dynamic-programming oracle.
    Oracle,
    /// Free-form use in diagnostics and tests.
    Custom(u64),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Targets => 0x7461_7267_6574_7331,
            Purpose::Rollout => 0x726f_6c6c_6f75_7431,
            Purpose::Oracle => 0x6f72_6163_6c65_3031,
            Purpose::Custom(t) => splitmix64(t ^ 0x6375_7374_6f6d_2121),
        }
    }
}

/// splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Open the stream for `(seed, purpose, stage, index)`.
pub fn stream(seed: u64, purpose: Purpose, stage: u64, index: u64) -> StreamRng {
    let key = splitmix64(seed ^ splitmix64(purpose.tag()));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(splitmix64(stage.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ splitmix64(index)));
    rng
}
