//! Embedding order: per-block mode permutations grouped into lattices.
//!
//! Lattice `k` of a plain schedule holds, for every block `b`, the single
//! coefficient at position `k` of that block's permutation. A macro schedule
//! additionally partitions blocks into 9 classes by `(row mod 3, col mod 3)`
//! and visits the classes one after the other, giving 576 lattices in which
//! any two blocks are at least two blocks apart.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::jpeg::ZIGZAG;
use crate::key::KeyedStream;

pub const MODES: usize = 64;
pub const MACRO_CLASSES: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanStrategy {
    LowHigh,
    HighLow,
    Random { seed: u64 },
}

impl ScanStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ScanStrategy::LowHigh => "low-high",
            ScanStrategy::HighLow => "high-low",
            ScanStrategy::Random { .. } => "random",
        }
    }
}

impl fmt::Display for ScanStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `low-high`, `high-low`, `random` (seed 0, to be replaced by the
/// key-derived seed) or `random:<hex seed>`.
impl FromStr for ScanStrategy {
    type Err = StegoError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low-high" | "lowhigh" | "lh" => Ok(ScanStrategy::LowHigh),
            "high-low" | "highlow" | "hl" => Ok(ScanStrategy::HighLow),
            "random" => Ok(ScanStrategy::Random { seed: 0 }),
            other => {
                let hex = other
                    .strip_prefix("random:")
                    .ok_or_else(|| StegoError::InvalidStrategy(format!("unknown strategy '{s}'")))?;
                let seed = u64::from_str_radix(hex.trim_start_matches("0x"), 16)
                    .map_err(|_| StegoError::InvalidStrategy(format!("bad seed in '{s}'")))?;
                Ok(ScanStrategy::Random { seed })
            }
        }
    }
}

/// Standard JPEG zigzag as a permutation of natural mode indices.
pub fn zigzag_order() -> [u8; 64] {
    let mut out = [0u8; 64];
    for (d, &n) in out.iter_mut().zip(ZIGZAG.iter()) {
        *d = n as u8;
    }
    out
}

/// Identifies one lattice: an optional macro class and a position in the
/// per-block permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeId {
    pub class: Option<u8>,
    pub position: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSchedule {
    blocks_x: usize,
    blocks_y: usize,
    strategy: ScanStrategy,
    macro_lattices: bool,
    /// `perms[b][k]` is the mode at position `k` of block `b`.
    perms: Vec<[u8; 64]>,
    /// `positions[b][mode]` inverts `perms[b]`.
    positions: Vec<[u8; 64]>,
}

fn block_perm(strategy: ScanStrategy, block: usize) -> [u8; 64] {
    match strategy {
        ScanStrategy::LowHigh => zigzag_order(),
        ScanStrategy::HighLow => {
            let mut z = zigzag_order();
            z.reverse();
            z
        }
        ScanStrategy::Random { seed } => {
            let mut p: [u8; 64] = std::array::from_fn(|i| i as u8);
            KeyedStream::new("jstego/schedule", seed, block as u64).shuffle(&mut p);
            p
        }
    }
}

/// Plain 64-lattice schedule.
pub fn build_schedule(strategy: ScanStrategy, blocks_x: usize, blocks_y: usize) -> LatticeSchedule {
    LatticeSchedule::new(strategy, blocks_x, blocks_y, false)
}

/// 9 x 64 lattice schedule for channels that filter before recompressing.
pub fn build_macro_schedule(
    strategy: ScanStrategy,
    blocks_x: usize,
    blocks_y: usize,
) -> LatticeSchedule {
    LatticeSchedule::new(strategy, blocks_x, blocks_y, true)
}

impl LatticeSchedule {
    fn new(strategy: ScanStrategy, blocks_x: usize, blocks_y: usize, macro_lattices: bool) -> Self {
        assert!(blocks_x > 0 && blocks_y > 0, "schedule needs at least one block");
        let n = blocks_x * blocks_y;
        let perms: Vec<[u8; 64]> = (0..n).map(|b| block_perm(strategy, b)).collect();
        let positions = perms
            .iter()
            .map(|p| {
                let mut inv = [0u8; 64];
                for (k, &m) in p.iter().enumerate() {
                    inv[m as usize] = k as u8;
                }
                inv
            })
            .collect();
        LatticeSchedule { blocks_x, blocks_y, strategy, macro_lattices, perms, positions }
    }

    pub fn blocks_x(&self) -> usize {
        self.blocks_x
    }

    pub fn blocks_y(&self) -> usize {
        self.blocks_y
    }

    pub fn num_blocks(&self) -> usize {
        self.perms.len()
    }

    pub fn strategy(&self) -> ScanStrategy {
        self.strategy
    }

    pub fn is_macro(&self) -> bool {
        self.macro_lattices
    }

    pub fn num_lattices(&self) -> usize {
        if self.macro_lattices {
            MACRO_CLASSES * MODES
        } else {
            MODES
        }
    }

    pub fn lattice(&self, k: usize) -> LatticeId {
        assert!(k < self.num_lattices(), "lattice {k} out of range");
        if self.macro_lattices {
            LatticeId { class: Some((k / MODES) as u8), position: (k % MODES) as u8 }
        } else {
            LatticeId { class: None, position: k as u8 }
        }
    }

    /// Macro class of a block, row-major over `(row mod 3, col mod 3)`.
    pub fn block_class(&self, block: usize) -> u8 {
        let (bx, by) = (block % self.blocks_x, block / self.blocks_x);
        ((by % 3) * 3 + bx % 3) as u8
    }

    pub fn mode_at(&self, block: usize, position: u8) -> u8 {
        self.perms[block][position as usize]
    }

    pub fn position_of(&self, block: usize, mode: u8) -> u8 {
        self.positions[block][mode as usize]
    }

    pub fn permutation(&self, block: usize) -> &[u8; 64] {
        &self.perms[block]
    }

    /// Global lattice index holding `(block, mode)`.
    pub fn lattice_of(&self, block: usize, mode: u8) -> usize {
        let pos = self.position_of(block, mode) as usize;
        if self.macro_lattices {
            self.block_class(block) as usize * MODES + pos
        } else {
            pos
        }
    }

    /// Blocks taking part in lattice `k`, ascending.
    pub fn lattice_blocks(&self, k: usize) -> Vec<usize> {
        match self.lattice(k).class {
            None => (0..self.num_blocks()).collect(),
            Some(c) => (0..self.num_blocks()).filter(|&b| self.block_class(b) == c).collect(),
        }
    }

    /// `(block, mode)` members of lattice `k`, in ascending block order.
    pub fn members(&self, k: usize) -> Vec<(usize, u8)> {
        let pos = self.lattice(k).position;
        self.lattice_blocks(k)
            .into_iter()
            .map(|b| (b, self.mode_at(b, pos)))
            .collect()
    }

    /// Blocks within Chebyshev distance 1 of `block`, including itself.
    pub fn neighborhood(&self, block: usize) -> impl Iterator<Item = usize> + '_ {
        let (bx, by) = ((block % self.blocks_x) as isize, (block / self.blocks_x) as isize);
        let (w, h) = (self.blocks_x as isize, self.blocks_y as isize);
        (-1..=1).flat_map(move |dy| {
            (-1..=1).filter_map(move |dx| {
                let (x, y) = (bx + dx, by + dy);
                (x >= 0 && y >= 0 && x < w && y < h).then(|| (y * w + x) as usize)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_head_and_tail() {
        let z = zigzag_order();
        assert_eq!(&z[..3], &[0, 1, 8]);
        assert_eq!(z[63], 63);
        let mut s = z.to_vec();
        s.sort();
        assert_eq!(s, (0..64).collect::<Vec<u8>>());
    }

    #[test]
    fn low_high_first_lattice_is_dc() {
        let s = build_schedule(ScanStrategy::LowHigh, 4, 3);
        assert!(s.members(0).iter().all(|&(_, m)| m == 0));
        assert_eq!(s.members(0).len(), 12);
    }

    #[test]
    fn high_low_reverses_low_high() {
        let lh = build_schedule(ScanStrategy::LowHigh, 3, 2);
        let hl = build_schedule(ScanStrategy::HighLow, 3, 2);
        for k in 0..64 {
            assert_eq!(lh.members(k), hl.members(63 - k));
        }
    }

    #[test]
    fn random_is_keyed_and_reproducible() {
        let a = build_schedule(ScanStrategy::Random { seed: 42 }, 40, 25);
        let b = build_schedule(ScanStrategy::Random { seed: 42 }, 40, 25);
        let c = build_schedule(ScanStrategy::Random { seed: 43 }, 40, 25);
        assert_eq!(a, b);
        let differing = (0..1000).filter(|&blk| a.permutation(blk) != c.permutation(blk)).count();
        assert!(differing > 990, "only {differing} of 1000 blocks differ");
        // blocks also differ from one another
        assert_ne!(a.permutation(0), a.permutation(1));
    }

    #[test]
    fn plain_lattices_partition_all_positions() {
        let s = build_schedule(ScanStrategy::Random { seed: 1 }, 5, 4);
        let mut seen = vec![[false; 64]; 20];
        for k in 0..s.num_lattices() {
            for (b, m) in s.members(k) {
                assert!(!seen[b][m as usize]);
                seen[b][m as usize] = true;
                assert_eq!(s.lattice_of(b, m), k);
            }
        }
        assert!(seen.iter().all(|b| b.iter().all(|&x| x)));
    }

    #[test]
    fn macro_partition_and_spacing() {
        let s = build_macro_schedule(ScanStrategy::LowHigh, 7, 5);
        assert_eq!(s.num_lattices(), 576);
        let mut count = vec![0usize; 35];
        for k in 0..576 {
            let members = s.members(k);
            for &(b, _) in &members {
                count[b] += 1;
                assert_eq!(s.block_class(b) as usize, k / 64);
            }
            for (i, &(a, _)) in members.iter().enumerate() {
                for &(b, _) in &members[i + 1..] {
                    let dx = (a % 7).abs_diff(b % 7);
                    let dy = (a / 7).abs_diff(b / 7);
                    assert!(dx.max(dy) >= 2);
                }
            }
        }
        assert!(count.iter().all(|&c| c == 64));
    }

    #[test]
    fn three_by_three_has_one_block_per_class() {
        let s = build_macro_schedule(ScanStrategy::HighLow, 3, 3);
        for class in 0..9 {
            assert_eq!(s.lattice_blocks(class * 64), vec![class]);
        }
    }

    #[test]
    fn neighborhood_clipped_at_edges() {
        let s = build_schedule(ScanStrategy::LowHigh, 3, 3);
        assert_eq!(s.neighborhood(0).collect::<Vec<_>>(), vec![0, 1, 3, 4]);
        assert_eq!(s.neighborhood(4).count(), 9);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("low-high".parse::<ScanStrategy>().unwrap(), ScanStrategy::LowHigh);
        assert_eq!(
            "random:ff".parse::<ScanStrategy>().unwrap(),
            ScanStrategy::Random { seed: 255 }
        );
        assert!("spiral".parse::<ScanStrategy>().is_err());
    }
}
