//! Which coefficients of a lattice can carry a +1 / -1 change that survives
//! the channel.
//!
//! A coefficient `c` at lattice position `k` of block `b` is robust towards
//! `i` in `{-1, +1}` when, with `R` the channel applied to the pseudo-stego:
//!
//! * R1: applying `i` leaves every already-processed position of `b`
//!   unchanged after recompression (with filtering: of every block in the
//!   3x3 neighbourhood of `b`),
//! * R2: the change itself survives, `R(c + i)[k] == c + i`,
//! * R3: leaving it alone is also stable, `R(c)[k] == c`.
//!
//! All blocks of a lattice are tested at once. Without a filter blocks do
//! not interact; with a filter the lattice's blocks are at least two blocks
//! apart, so their 3x3 neighbourhoods are disjoint. Either way one channel
//! call per delta answers the question for the whole lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::jpeg::{CoefficientPlane, Recompressor};
use crate::lattice::LatticeSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Both,
    PlusOnly,
    MinusOnly,
    NonRobust,
}

impl Label {
    fn from_directions(plus: bool, minus: bool) -> Self {
        match (plus, minus) {
            (true, true) => Label::Both,
            (true, false) => Label::PlusOnly,
            (false, true) => Label::MinusOnly,
            (false, false) => Label::NonRobust,
        }
    }

    pub fn plus_ok(self) -> bool {
        matches!(self, Label::Both | Label::PlusOnly)
    }

    pub fn minus_ok(self) -> bool {
        matches!(self, Label::Both | Label::MinusOnly)
    }

    pub fn is_robust(self) -> bool {
        self != Label::NonRobust
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RobustEntry {
    pub block: usize,
    pub mode: u8,
    pub label: Label,
    /// Value the receiver will read when this coefficient is left alone.
    pub predicted: i32,
}

/// Labels for every member of one lattice, in the lattice's block order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobustnessMap {
    pub lattice: usize,
    pub entries: Vec<RobustEntry>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub both: usize,
    pub plus_only: usize,
    pub minus_only: usize,
    pub non_robust: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.both + self.plus_only + self.minus_only + self.non_robust
    }

    pub fn robust(&self) -> usize {
        self.both + self.plus_only + self.minus_only
    }

    pub fn robust_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.robust() as f64 / self.total() as f64
        }
    }
}

impl RobustnessMap {
    pub fn counts(&self) -> LabelCounts {
        let mut c = LabelCounts::default();
        for e in &self.entries {
            match e.label {
                Label::Both => c.both += 1,
                Label::PlusOnly => c.plus_only += 1,
                Label::MinusOnly => c.minus_only += 1,
                Label::NonRobust => c.non_robust += 1,
            }
        }
        c
    }
}

/// Positions already embedded, as a per-block bit mask over modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessedSet {
    masks: Vec<u64>,
}

impl ProcessedSet {
    pub fn empty(num_blocks: usize) -> Self {
        ProcessedSet { masks: vec![0; num_blocks] }
    }

    /// Everything in lattices `0..k` of `schedule`.
    pub fn before(schedule: &LatticeSchedule, k: usize) -> Self {
        let mut p = Self::empty(schedule.num_blocks());
        for l in 0..k {
            p.mark_lattice(schedule, l);
        }
        p
    }

    pub fn mark_lattice(&mut self, schedule: &LatticeSchedule, k: usize) {
        for (b, m) in schedule.members(k) {
            self.masks[b] |= 1u64 << m;
        }
    }

    pub fn contains(&self, block: usize, mode: u8) -> bool {
        self.masks[block] >> mode & 1 == 1
    }

    pub fn mask(&self, block: usize) -> u64 {
        self.masks[block]
    }

    pub fn is_empty(&self) -> bool {
        self.masks.iter().all(|&m| m == 0)
    }
}

/// Bit `n` set where the two blocks differ.
#[inline]
fn diff_mask(a: &[i32; 64], b: &[i32; 64]) -> u64 {
    let mut m = 0u64;
    for n in 0..64 {
        m |= ((a[n] != b[n]) as u64) << n;
    }
    m
}

/// Result of probing one lattice: its labels plus the three channel outputs.
#[derive(Clone, Debug)]
pub struct LatticeProbe {
    pub map: RobustnessMap,
    pub r0: CoefficientPlane,
    pub r_plus: CoefficientPlane,
    pub r_minus: CoefficientPlane,
}

fn check_channel(schedule: &LatticeSchedule, channel: &Recompressor) -> Result<()> {
    if channel.filter().is_some() && !schedule.is_macro() {
        return Err(StegoError::ScheduleMismatch(
            "a filtering channel needs the 9 x 64 macro-lattice schedule".into(),
        ));
    }
    Ok(())
}

/// Classify lattice `k` of `pseudo_stego`. Costs three channel calls.
pub fn classify_lattice(
    pseudo_stego: &CoefficientPlane,
    schedule: &LatticeSchedule,
    k: usize,
    processed: &ProcessedSet,
    channel: &Recompressor,
) -> Result<RobustnessMap> {
    check_channel(schedule, channel)?;
    let r0 = channel.recompress(pseudo_stego, &[])?;
    Ok(probe_lattice(pseudo_stego, r0, schedule, k, processed, channel)?.map)
}

/// Classify lattice `k` given `r0 = R(pseudo_stego)` already computed.
/// Costs two channel calls.
pub fn probe_lattice(
    pseudo_stego: &CoefficientPlane,
    r0: CoefficientPlane,
    schedule: &LatticeSchedule,
    k: usize,
    processed: &ProcessedSet,
    channel: &Recompressor,
) -> Result<LatticeProbe> {
    check_channel(schedule, channel)?;
    let members = schedule.members(k);
    let r_plus = channel.recompress_shifted(pseudo_stego, &members, 1);
    let r_minus = channel.recompress_shifted(pseudo_stego, &members, -1);
    let filtered = channel.filter().is_some();

    let survives = |rd: &CoefficientPlane, b: usize, n: u8, target: i32| -> bool {
        if rd.blocks[b][n as usize] != target {
            return false;
        }
        if filtered {
            schedule
                .neighborhood(b)
                .all(|nb| diff_mask(&rd.blocks[nb], &r0.blocks[nb]) & processed.mask(nb) == 0)
        } else {
            diff_mask(&rd.blocks[b], &r0.blocks[b]) & processed.mask(b) == 0
        }
    };

    let entries = members
        .iter()
        .map(|&(b, n)| {
            let c = pseudo_stego.blocks[b][n as usize];
            let predicted = r0.blocks[b][n as usize];
            let label = if predicted != c {
                Label::NonRobust
            } else {
                Label::from_directions(
                    survives(&r_plus, b, n, c + 1),
                    survives(&r_minus, b, n, c - 1),
                )
            };
            RobustEntry { block: b, mode: n, label, predicted }
        })
        .collect();

    Ok(LatticeProbe { map: RobustnessMap { lattice: k, entries }, r0, r_plus, r_minus })
}

/// Labels of every lattice of the unmodified cover ("initial robust set").
///
/// `R(cover)` is shared by all lattices, so this costs `1 + 2 L` channel
/// calls for `L` lattices.
pub fn initial_robust_map(
    cover: &CoefficientPlane,
    schedule: &LatticeSchedule,
    channel: &Recompressor,
) -> Result<Vec<RobustnessMap>> {
    check_channel(schedule, channel)?;
    let r0 = channel.recompress(cover, &[])?;
    initial_robust_map_from(cover, &r0, schedule, channel)
}

/// [`initial_robust_map`] with `R(cover)` supplied; costs `2 L` calls.
pub fn initial_robust_map_from(
    cover: &CoefficientPlane,
    r0: &CoefficientPlane,
    schedule: &LatticeSchedule,
    channel: &Recompressor,
) -> Result<Vec<RobustnessMap>> {
    let mut processed = ProcessedSet::empty(schedule.num_blocks());
    let mut maps = Vec::with_capacity(schedule.num_lattices());
    for k in 0..schedule.num_lattices() {
        let probe = probe_lattice(cover, r0.clone(), schedule, k, &processed, channel)?;
        maps.push(probe.map);
        processed.mark_lattice(schedule, k);
    }
    Ok(maps)
}

/// `R` of the plane obtained by applying `changes` (one delta per block of
/// lattice `k`) to the probed pseudo-stego, assembled from the probe without
/// another channel call.
///
/// Each block's channel output depends only on the lattice member in its
/// 3x3 neighbourhood (or on itself without a filter), so it is copied from
/// whichever of `r0`, `r+`, `r-` matches that member's delta.
pub fn assemble_recompressed(
    probe: &LatticeProbe,
    schedule: &LatticeSchedule,
    deltas: &[i8],
    filtered: bool,
) -> CoefficientPlane {
    let mut out = probe.r0.clone();
    let members = &probe.map.entries;
    debug_assert_eq!(members.len(), deltas.len());
    let mut owner_delta = vec![0i8; schedule.num_blocks()];
    for (e, &d) in members.iter().zip(deltas) {
        if d == 0 {
            continue;
        }
        if filtered {
            for nb in schedule.neighborhood(e.block) {
                owner_delta[nb] = d;
            }
        } else {
            owner_delta[e.block] = d;
        }
    }
    for (b, &d) in owner_delta.iter().enumerate() {
        match d {
            1 => out.blocks[b] = probe.r_plus.blocks[b],
            -1 => out.blocks[b] = probe.r_minus.blocks[b],
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::FilterSpec;
    use crate::jpeg::{quant_table_from_qf, recompress, Modification, PixelPlane};
    use crate::lattice::{build_macro_schedule, build_schedule, ScanStrategy};

    fn flat(qf: u8, w: usize, h: usize, v: u8) -> CoefficientPlane {
        PixelPlane::new(w, h, vec![v; w * h]).unwrap().compress(&quant_table_from_qf(qf).unwrap())
    }

    #[test]
    fn flat_gray_dc_lattice_is_fully_robust() {
        let c = flat(75, 32, 32, 128);
        let s = build_schedule(ScanStrategy::LowHigh, 4, 4);
        let rc = Recompressor::new(None);
        let map = classify_lattice(&c, &s, 0, &ProcessedSet::empty(16), &rc).unwrap();
        assert_eq!(rc.calls(), 3);
        assert!(map.entries.iter().all(|e| e.label == Label::Both && e.mode == 0));
    }

    /// One coefficient at a time, straight from the definitions.
    fn naive_label(
        c: &CoefficientPlane,
        b: usize,
        n: u8,
        processed: &ProcessedSet,
        filter: Option<&FilterSpec>,
    ) -> Label {
        let r0 = recompress(c, &[], filter).unwrap();
        let v = c.blocks[b][n as usize];
        if r0.blocks[b][n as usize] != v {
            return Label::NonRobust;
        }
        let ok = |d: i8| {
            let r = recompress(c, &[Modification::new(b, n, d)], filter).unwrap();
            if r.blocks[b][n as usize] != v + d as i32 {
                return false;
            }
            (0..c.num_blocks()).all(|ob| {
                (0..64u8).all(|m| !processed.contains(ob, m) || r.blocks[ob][m as usize] == r0.blocks[ob][m as usize])
            })
        };
        Label::from_directions(ok(1), ok(-1))
    }

    fn noisy(qf: u8, w: usize, h: usize, seed: u64) -> CoefficientPlane {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let px = (0..w * h)
            .map(|i| {
                let base = if (i / w) < h / 2 { 250 } else { 60 };
                (base + rng.gen_range(-8i32..=8)).clamp(0, 255) as u8
            })
            .collect();
        PixelPlane::new(w, h, px).unwrap().compress(&quant_table_from_qf(qf).unwrap())
    }

    fn assert_matches_naive(c: &CoefficientPlane, s: &LatticeSchedule, maps: &[RobustnessMap]) {
        for (k, map) in maps.iter().enumerate() {
            let processed = ProcessedSet::before(s, k);
            for e in &map.entries {
                assert_eq!(e.label, naive_label(c, e.block, e.mode, &processed, None), "k={k} {e:?}");
                assert_eq!(e.predicted, recompress(c, &[], None).unwrap().blocks[e.block][e.mode as usize]);
            }
        }
    }

    #[test]
    fn batched_labels_match_naive_oracle() {
        let mut kinds = std::collections::HashSet::new();
        for seed in 0..50u64 {
            let qf = [75, 90, 95, 100][seed as usize % 4];
            let c = noisy(qf, 24, 24, seed);
            let s = build_schedule(ScanStrategy::Random { seed }, 3, 3);
            let rc = Recompressor::new(None);
            let maps = initial_robust_map(&c, &s, &rc).unwrap();
            assert_eq!(rc.calls(), 1 + 2 * 64);
            assert_matches_naive(&c, &s, &maps);
            kinds.extend(maps.iter().flat_map(|m| m.entries.iter().map(|e| e.label)));
        }
        assert_eq!(kinds.len(), 4);
    }

    #[test]
    fn flat_gray_cover_matches_naive_oracle() {
        let c = flat(75, 24, 24, 128);
        let s = build_schedule(ScanStrategy::LowHigh, 3, 3);
        let maps = initial_robust_map(&c, &s, &Recompressor::new(None)).unwrap();
        assert_matches_naive(&c, &s, &maps);
        // the (0,4) basis at step 12 decodes to exact half-integers, and
        // rounding them away from zero moves the DC
        let k = s.position_of(0, 4) as usize;
        assert_eq!(maps[k].counts().non_robust, 9);
        let robust: usize = maps.iter().map(|m| m.counts().robust()).sum();
        assert_eq!(robust, 63 * 9);
    }

    #[test]
    fn batched_labels_match_naive_oracle_with_filter() {
        let c = noisy(90, 48, 48, 12);
        let s = build_macro_schedule(ScanStrategy::LowHigh, 6, 6);
        let f = FilterSpec::gaussian3();
        let rc = Recompressor::new(Some(f.clone()));
        for k in [0, 3, 64 + 2, 4 * 64 + 30] {
            let processed = ProcessedSet::before(&s, k);
            let map = classify_lattice(&c, &s, k, &processed, &rc).unwrap();
            for e in &map.entries {
                assert_eq!(e.label, naive_label(&c, e.block, e.mode, &processed, Some(&f)), "k={k} {e:?}");
            }
        }
    }

    #[test]
    fn clipped_block_is_non_robust() {
        // DC that decodes to 255.5 everywhere: R(c, 0) pulls it back
        let mut c = CoefficientPlane::zeros(8, 8, quant_table_from_qf(100).unwrap());
        c.blocks[0][0] = 1020;
        let s = build_schedule(ScanStrategy::LowHigh, 1, 1);
        let rc = Recompressor::new(None);
        let map = classify_lattice(&c, &s, 0, &ProcessedSet::empty(1), &rc).unwrap();
        assert_eq!(map.entries[0].label, Label::NonRobust);
        assert_eq!(map.entries[0].predicted, 1016);
    }

    #[test]
    fn filter_requires_macro_schedule() {
        let c = flat(75, 16, 16, 100);
        let s = build_schedule(ScanStrategy::LowHigh, 2, 2);
        let rc = Recompressor::new(Some(FilterSpec::gaussian3()));
        assert!(matches!(
            classify_lattice(&c, &s, 0, &ProcessedSet::empty(4), &rc),
            Err(StegoError::ScheduleMismatch(_))
        ));
        let m = build_macro_schedule(ScanStrategy::LowHigh, 2, 2);
        assert!(classify_lattice(&c, &m, 0, &ProcessedSet::empty(4), &rc).is_ok());
    }

    #[test]
    fn assembled_plane_matches_channel() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut px = vec![0u8; 40 * 32];
        for v in px.iter_mut() {
            *v = rng.gen_range(0..=255);
        }
        let c = PixelPlane::new(40, 32, px).unwrap().compress(&quant_table_from_qf(90).unwrap());
        for filter in [None, Some(FilterSpec::sharpen3())] {
            let s = build_macro_schedule(ScanStrategy::Random { seed: 4 }, 5, 4);
            let rc = Recompressor::new(filter.clone());
            let k = 64 * 4 + 10;
            let r0 = rc.recompress(&c, &[]).unwrap();
            let probe = probe_lattice(&c, r0, &s, k, &ProcessedSet::before(&s, k), &rc).unwrap();
            let deltas: Vec<i8> = (0..probe.map.entries.len()).map(|_| rng.gen_range(-1..=1)).collect();
            let mods: Vec<Modification> = probe
                .map
                .entries
                .iter()
                .zip(&deltas)
                .filter(|(_, &d)| d != 0)
                .map(|(e, &d)| Modification::new(e.block, e.mode, d))
                .collect();
            let expected = recompress(&c, &mods, filter.as_ref()).unwrap();
            assert_eq!(assemble_recompressed(&probe, &s, &deltas, filter.is_some()), expected);
        }
    }
}
