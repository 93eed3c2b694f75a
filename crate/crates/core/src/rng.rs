//! Seed derivation for reproducible simulation streams.
//!
//! Every random draw in a campaign comes from a ChaCha8 stream whose seed is
//! derived from the scenario seed, a purpose tag, and the structural indices
//! of the draw site (trial, gNB, sweep point, ...). Streams for distinct
//! sites are independent, so trials can run in any order, including in
//! parallel, and still reproduce the same bytes.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keep streams for different quantities disjoint even when
/// their structural indices collide.
pub mod tag {
    /// Inter-gNB offset draw (once per session).
    pub const DELTA: u64 = 1;
    /// UE-gNB offset draw (once per trial).
    pub const PHI: u64 = 2;
    /// Gaussian TOA measurement noise (per trial, per gNB).
    pub const TOA_NOISE: u64 = 3;
    /// Per-RE grid noise (per study point, per trial).
    pub const GRID_NOISE: u64 = 4;
    /// Sub-tap range dither in sweep studies (per study point, per trial).
    pub const DITHER: u64 = 5;
}

/// SplitMix64 finalizer; full-avalanche mixing of one word into the state.
fn mix(state: u64, word: u64) -> u64 {
    let mut z = state
        .wrapping_add(word)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from the root scenario seed, a purpose tag, and the
/// structural indices of the draw site.
pub fn derive_seed(root: u64, purpose: u64, indices: &[u64]) -> u64 {
    let mut s = mix(root, purpose);
    for &ix in indices {
        s = mix(s, ix);
    }
    s
}

/// A ChaCha8 stream for one draw site.
pub fn stream(root: u64, purpose: u64, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, purpose, indices))
}
