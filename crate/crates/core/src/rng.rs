//! Counter-derived random substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags separating the independent draws made for one trial.
pub mod tag {
    pub const CHANNEL: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const DATA: u64 = 3;
    pub const INTERLEAVER: u64 = 4;
    pub const ENUMERATION: u64 = 5;
    pub const VERIFY: u64 = 6;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 256-bit ChaCha key from `master` and a coordinate tuple such
/// as `(snr_index, trial_index, tag)`. Distinct coordinates give unrelated
/// keys, so draws never depend on scheduling order.
pub fn substream_seed(master: u64, coords: &[u64]) -> [u8; 32] {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for &c in coords {
        state ^= c.wrapping_mul(0xD6E8_FEB8_6659_FD93).rotate_left(17) ^ acc;
        acc = splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    seed
}

pub fn substream(master: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(substream_seed(master, coords))
}

/// A 64-bit seed derived the same way, e.g. for logging a fixed
/// interleaver seed.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    let bytes = substream_seed(master, coords);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}
