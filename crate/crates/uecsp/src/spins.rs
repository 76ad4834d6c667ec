//! Canonical big-endian base-r encoding of spin tuples.
//!
//! The first spin is the most significant digit; every table in the crate is
//! indexed by this encoding.

use serde::{Deserialize, Serialize};

/// Canonical index of a spin tuple.
#[inline]
pub fn encode(spins: &[u8], r: u8) -> usize {
    let r = r as usize;
    spins.iter().fold(0usize, |acc, &s| {
        debug_assert!((s as usize) < r);
        acc * r + s as usize
    })
}

/// Inverse of [`encode`] for a tuple of the given arity.
pub fn decode(index: usize, arity: usize, r: u8) -> Vec<u8> {
    let mut out = vec![0u8; arity];
    decode_into(index, r, &mut out);
    out
}

#[inline]
pub fn decode_into(mut index: usize, r: u8, out: &mut [u8]) {
    let r = r as usize;
    for slot in out.iter_mut().rev() {
        *slot = (index % r) as u8;
        index /= r;
    }
    debug_assert_eq!(index, 0);
}

/// r^arity as u64 (no overflow for the table sizes this crate accepts).
pub fn table_size(r: u8, arity: usize) -> u64 {
    (r as u64).pow(arity as u32)
}

/// A spin tuple together with its spin-set size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinTuple {
    pub r: u8,
    pub spins: Vec<u8>,
}

impl SpinTuple {
    pub fn new(r: u8, spins: Vec<u8>) -> crate::Result<Self> {
        if r < 2 {
            return Err(crate::Error::Malformed(format!("spin set size {r} < 2")));
        }
        if let Some(&s) = spins.iter().find(|&&s| s >= r) {
            return Err(crate::Error::Malformed(format!("spin {s} out of range 0..{r}")));
        }
        Ok(Self { r, spins })
    }

    pub fn arity(&self) -> usize {
        self.spins.len()
    }

    pub fn index(&self) -> usize {
        encode(&self.spins, self.r)
    }

    pub fn from_index(index: usize, arity: usize, r: u8) -> Self {
        Self { r, spins: decode(index, arity, r) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_endian_examples() {
        assert_eq!(encode(&[0, 1, 1], 2), 3);
        assert_eq!(encode(&[1, 0, 1], 2), 5);
        assert_eq!(encode(&[1, 1, 0], 2), 6);
        assert_eq!(encode(&[1, 2], 3), 5);
        assert_eq!(decode(5, 2, 3), vec![1, 2]);
    }

    #[test]
    fn roundtrip_exhaustive_small() {
        for r in 2u8..=4 {
            for arity in 1usize..=4 {
                for idx in 0..table_size(r, arity) as usize {
                    assert_eq!(encode(&decode(idx, arity, r), r), idx);
                }
            }
        }
    }
}
