//! Seed derivation for reproducible, splittable random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose seed is
//! derived from a master seed plus a path of stream indices (for example
//! `[grid_index, trial_index]` or `[constraint_index]`). Any single stream can
//! be replayed without generating the ones before it, which is what makes
//! parallel sampling schedule-independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 32-byte seed from a master seed and a stream path.
pub fn derive_seed(master: u64, path: &[u64]) -> [u8; 32] {
    let mut state = master ^ 0x6c07_9768_b6b5_a923;
    let mut acc = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0xff51_afd7_ed55_8ccd);
        acc ^= splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    let mut s = acc;
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    seed
}

pub fn derive_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(master, path))
}

/// Derived u64 sub-seed, for code that wants a master seed of its own.
pub fn derive_sub_seed(master: u64, path: &[u64]) -> u64 {
    u64::from_le_bytes(derive_seed(master, path)[..8].try_into().expect("8 bytes"))
}
