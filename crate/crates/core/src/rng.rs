//! Counter-based random substreams.
//!
//! Every simulated path draws from ChaCha8 streams addressed by
//! `(master seed, path index, substream)`. Results therefore never depend on
//! how paths are scheduled across threads.
//!
//! The scenario slot of a [`SeedTriple`] labels which control was applied to
//! the noise; it does not select the noise itself. All scenarios at a given
//! path index see the same Brownian increments and the same latent jump
//! events (common random numbers).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedTriple {
    pub master: u64,
    pub scenario: usize,
    pub path: usize,
}

impl SeedTriple {
    pub fn new(master: u64, scenario: usize, path: usize) -> Self {
        Self {
            master,
            scenario,
            path,
        }
    }

    pub fn with_scenario(self, scenario: usize) -> Self {
        Self { scenario, ..self }
    }
}

impl fmt::Display for SeedTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(master={}, scenario={}, path={})",
            self.master, self.scenario, self.path
        )
    }
}

/// Independent streams used by one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Brownian = 0,
    Jumps = 1,
    Marks = 2,
    Probes = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key_from(master: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = master;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Stream for `(master, path, sub)`.
pub fn stream(master: u64, path: usize, sub: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key_from(master));
    rng.set_stream(((path as u64) << 2) | sub as u64);
    rng
}

/// Stream seeded from a single derived word (used for per-event mark draws).
pub fn from_word(word: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(key_from(word))
}
