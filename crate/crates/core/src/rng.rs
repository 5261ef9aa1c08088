//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! `derive_seed(seed, path)`, where `path` names the stream (column index,
//! trial index, grid cell, ...). Streams never depend on call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a base seed together with a stream path into a new 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &component in path {
        h = splitmix64(h ^ splitmix64(component.wrapping_add(GOLDEN)));
    }
    h
}

/// Counter-based generator for the stream `(seed, path)`.
pub fn stream_rng(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

/// Stable stream key for a real-valued grid coordinate such as `p`.
pub fn float_key(x: f64) -> u64 {
    x.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, &[1, 2]).random();
        let b: u64 = stream_rng(7, &[1, 2]).random();
        let c: u64 = stream_rng(7, &[2, 1]).random();
        let d: u64 = stream_rng(8, &[1, 2]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn empty_path_differs_from_zero_path() {
        assert_ne!(derive_seed(0, &[]), derive_seed(0, &[0]));
    }
}
