//! In-band length bookkeeping.
//!
//! Lattice 0 carries only a link. Every link names the next lattice that
//! carries data and how many bits it carries, its own link included. A link
//! with length 0 ends the chain. The receiver therefore needs nothing beyond
//! the key, the strategy and the image dimensions.

use crate::error::{Result, StegoError};
use crate::lattice::LatticeSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub next: usize,
    /// Bits carried by `next`; 0 terminates.
    pub len: usize,
}

impl Link {
    pub const END: Link = Link { next: 0, len: 0 };

    pub fn is_end(&self) -> bool {
        self.len == 0
    }
}

fn ceil_log2(x: usize) -> u32 {
    usize::BITS - x.saturating_sub(1).leading_zeros()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Framing {
    pub index_bits: u32,
    pub len_bits: u32,
    lattices: usize,
}

impl Framing {
    pub fn for_schedule(schedule: &LatticeSchedule) -> Self {
        let lattices = schedule.num_lattices();
        let largest = (0..lattices.min(9 * 64))
            .step_by(64)
            .map(|k| schedule.lattice_blocks(k).len())
            .max()
            .unwrap_or(0);
        Framing { index_bits: ceil_log2(lattices), len_bits: ceil_log2(largest + 1), lattices }
    }

    pub fn link_bits(&self) -> usize {
        (self.index_bits + self.len_bits) as usize
    }

    pub fn encode(&self, link: Link) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.link_bits());
        push_bits(&mut out, link.next as u64, self.index_bits);
        push_bits(&mut out, link.len as u64, self.len_bits);
        out
    }

    /// Decode and sanity-check the link read from lattice `current` of
    /// `sizes[current]` members.
    pub fn decode(&self, bits: &[u8], current: usize, sizes: impl Fn(usize) -> usize) -> Result<Link> {
        if bits.len() < self.link_bits() {
            return Err(StegoError::InvalidLength("truncated link".into()));
        }
        let next = read_bits(&bits[..self.index_bits as usize]) as usize;
        let len = read_bits(&bits[self.index_bits as usize..self.link_bits()]) as usize;
        if len == 0 {
            return Ok(Link::END);
        }
        if next <= current || next >= self.lattices {
            return Err(StegoError::InvalidLength(format!("link from lattice {current} to {next}")));
        }
        if len < self.link_bits() || len > sizes(next) {
            return Err(StegoError::InvalidLength(format!("lattice {next} cannot carry {len} bits")));
        }
        Ok(Link { next, len })
    }
}

fn push_bits(out: &mut Vec<u8>, v: u64, n: u32) {
    for i in (0..n).rev() {
        out.push((v >> i & 1) as u8);
    }
}

fn read_bits(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| acc << 1 | (b & 1) as u64)
}

/// Most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| b >> i & 1)).collect()
}

pub fn bits_to_bytes(bits: &[u8]) -> Result<Vec<u8>> {
    if !bits.len().is_multiple_of(8) {
        return Err(StegoError::InvalidLength(format!("{} bits is not a whole number of bytes", bits.len())));
    }
    Ok(bits.chunks(8).map(|c| read_bits(c) as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_macro_schedule, build_schedule, ScanStrategy};
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(ceil_log2(64), 6);
        assert_eq!(ceil_log2(576), 10);
        assert_eq!(ceil_log2(1025), 11);
        assert_eq!(ceil_log2(1), 0);
        let f = Framing::for_schedule(&build_schedule(ScanStrategy::LowHigh, 32, 32));
        assert_eq!((f.index_bits, f.len_bits), (6, 11));
        let f = Framing::for_schedule(&build_macro_schedule(ScanStrategy::LowHigh, 32, 32));
        // largest class holds 11 x 11 blocks
        assert_eq!((f.index_bits, f.len_bits), (10, 7));
    }

    #[test]
    fn link_validation() {
        let f = Framing::for_schedule(&build_schedule(ScanStrategy::LowHigh, 4, 4));
        let size = |_| 16;
        let ok = Link { next: 5, len: 16 };
        assert_eq!(f.decode(&f.encode(ok), 2, size).unwrap(), ok);
        assert_eq!(f.decode(&f.encode(Link::END), 2, size).unwrap(), Link::END);
        assert!(f.decode(&f.encode(ok), 5, size).is_err());
        assert!(f.decode(&f.encode(Link { next: 9, len: 3 }), 2, size).is_err());
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            prop_assert_eq!(bits_to_bytes(&bytes_to_bits(&bytes)).unwrap(), bytes);
        }
    }

    #[test]
    fn msb_first() {
        assert_eq!(bytes_to_bits(&[0b1000_0001]), vec![1, 0, 0, 0, 0, 0, 0, 1]);
        assert!(bits_to_bytes(&[1, 0]).is_err());
    }
}
