// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded, stream-split random number generation.
//!
//! Every random draw in the crate comes from a ChaCha20 stream
//! (`rand_chacha::ChaCha20Rng`). The 256-bit key is the user seed expanded
//! with four SplitMix64 steps; the 64-bit ChaCha stream id is obtained by
//! folding a domain tag and a path of indices through SplitMix64. Streams
//! for distinct `(domain, path)` pairs never share keystream, and a stream's
//! output depends only on `(seed, domain, path)`, so draws are independent
//! of call order and thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Purpose tag mixed into the stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Intervals = 1,
    Directions = 2,
    Scenario = 3,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step applied to `state`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        let word = splitmix64(state);
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

fn stream_id(domain: Domain, path: &[u64]) -> u64 {
    let mut acc = splitmix64(domain as u64);
    for &x in path {
        acc = splitmix64(acc ^ splitmix64(x));
    }
    acc
}

/// The generator for `(seed, domain, path)`.
pub fn stream(seed: u64, domain: Domain, path: &[u64]) -> StreamRng {
    let mut rng = ChaCha20Rng::from_seed(key_from_seed(seed));
    rng.set_stream(stream_id(domain, path));
    rng
}
