//! Keyed random streams.
//!
//! Every random draw comes from a ChaCha8 stream keyed by
//! `(master_seed, index, purpose)`: the master seed fills the key, and the
//! index and purpose select the 64-bit stream id. ChaCha is counter based, so
//! streams are independent, reproducible across platforms, and unaffected by
//! the order in which trials run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Noise = 1,
    PointSet = 2,
    EvalPoint = 3,
    Values = 4,
}

pub fn stream(master_seed: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((index << 8) | purpose as u64);
    rng
}
