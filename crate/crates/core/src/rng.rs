//! Counter-based keyed randomness.
//!
//! Every random quantity in the crate is a pure function of a seed, a purpose
//! tag and the identifiers of the entity it belongs to. Two graphs generated
//! from the same seed therefore see the same coin for the same vertex pair,
//! which is what makes the coupled constructions nest.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Purpose tags separating independent families of draws.
pub mod tag {
    pub const POSITION: u64 = 0x01;
    pub const WEIGHT: u64 = 0x02;
    pub const RETENTION: u64 = 0x03;
    pub const EDGE_COIN: u64 = 0x04;
    pub const EDGE_LENGTH: u64 = 0x05;
    pub const COUNT: u64 = 0x06;
    pub const SUBSET: u64 = 0x07;
    pub const JUMP: u64 = 0x08;
    pub const PAIRS: u64 = 0x09;
    pub const REPLICA: u64 = 0x0A;
    pub const BRW: u64 = 0x0B;
    pub const PROBE: u64 = 0x0C;
}

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a seed, a purpose tag and a list of keys.
#[inline]
pub fn hash(seed: u64, tag: u64, keys: &[u64]) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    h = mix64(h ^ tag.wrapping_mul(GOLDEN));
    for &k in keys {
        h = mix64(h.wrapping_add(GOLDEN) ^ k);
    }
    h
}

/// Maps 64 random bits to `[0, 1)`.
#[inline]
pub fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps 64 random bits to the open interval `(0, 1)`.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Open uniform keyed on `(seed, tag, keys)`.
#[inline]
pub fn keyed_uniform(seed: u64, tag: u64, keys: &[u64]) -> f64 {
    open_unit(hash(seed, tag, keys))
}

/// Open uniform attached to an unordered pair of keys.
#[inline]
pub fn pair_uniform(seed: u64, tag: u64, a: u64, b: u64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    keyed_uniform(seed, tag, &[lo, hi])
}

/// A SplitMix64 stream started from a keyed state.
#[derive(Debug, Clone)]
pub struct KeyedStream {
    state: u64,
}

impl KeyedStream {
    pub fn new(seed: u64, tag: u64, keys: &[u64]) -> Self {
        KeyedStream { state: hash(seed, tag, keys) }
    }

    pub fn from_seed(seed: u64) -> Self {
        KeyedStream { state: mix64(seed) }
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn open01(&mut self) -> f64 {
        open_unit(self.next_u64())
    }
}

impl RngCore for KeyedStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_uniform_is_symmetric() {
        assert_eq!(pair_uniform(7, tag::EDGE_COIN, 3, 9), pair_uniform(7, tag::EDGE_COIN, 9, 3));
        assert_ne!(pair_uniform(7, tag::EDGE_COIN, 3, 9), pair_uniform(8, tag::EDGE_COIN, 3, 9));
    }

    #[test]
    fn open_unit_excludes_endpoints() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn stream_mean_is_half() {
        let mut s = KeyedStream::new(1, tag::PROBE, &[]);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| s.open01()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005);
    }
}
