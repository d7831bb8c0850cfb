//! Splittable seed streams.
//!
//! Every random quantity in the crate is drawn from a [`SeedStream`] derived
//! from the run seed by a path of names and indices, e.g.
//! `root.child("planner").index(m).index(trial)`. Two streams with the same
//! path always yield the same generator, so Monte Carlo loops can be split
//! across threads in any order and still reproduce a serial run bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator handed out by [`SeedStream::rng`].
pub type StreamRng = ChaCha8Rng;

/// A node in the tree of named random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream {
            key: splitmix64(seed ^ 0x6a09_e667_f3bc_c908),
        }
    }

    /// Sub-stream identified by a name.
    pub fn child(&self, name: &str) -> Self {
        SeedStream {
            key: splitmix64(self.key ^ fnv1a(name.as_bytes())),
        }
    }

    /// Sub-stream identified by an index (trial, telegraph, symbol).
    pub fn index(&self, i: u64) -> Self {
        SeedStream {
            key: splitmix64(
                self.key
                    .wrapping_add(splitmix64(i.wrapping_add(0x9e37_79b9_7f4a_7c15))),
            ),
        }
    }

    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
