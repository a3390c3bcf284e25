//! Deterministic substream derivation.
//!
//! Every random draw comes from a ChaCha8 stream seeded by a 64-bit key:
//!
//! ```text
//! trial_seed = fold(fold(0, master), trial)
//! stream     = fold(fold(fold(trial_seed, agent), round), phase)
//! fold(h, v) = splitmix64(h ^ splitmix64(v))
//! ```
//!
//! `splitmix64` is the standard finalizer (increment `0x9E3779B97F4A7C15`,
//! multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`). Because each
//! agent's stream depends only on the key, results do not depend on the
//! order in which agents are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn splitmix64(v: u64) -> u64 {
    let mut z = v.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fold(h: u64, v: u64) -> u64 {
    splitmix64(h ^ splitmix64(v))
}

/// What a stream is used for; part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Phase {
    Sampling = 1,
    Rounding = 2,
    Instance = 3,
    Verify = 4,
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    fold(fold(0, master), trial)
}

/// Key of one agent's stream for one round and phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub agent: u64,
    pub round: u64,
    pub phase: Phase,
}

impl StreamKey {
    pub fn new(seed: u64, agent: usize, round: usize, phase: Phase) -> Self {
        StreamKey {
            seed,
            agent: agent as u64,
            round: round as u64,
            phase,
        }
    }

    pub fn id(&self) -> u64 {
        fold(
            fold(fold(self.seed, self.agent), self.round),
            self.phase as u64,
        )
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::seed_from_u64(self.id())
    }
}
