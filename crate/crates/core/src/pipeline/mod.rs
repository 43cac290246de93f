//! Embedding and extraction over the lattice schedule.

mod channel;
mod framing;

use serde::{Deserialize, Serialize};

pub use channel::{simulate_channel, ChannelSpec, Coder, TMPDIR_ENV};
pub use framing::{bits_to_bytes, bytes_to_bits, Framing, Link};

use crate::costs::{base_costs, solve_change_rates, spread_payload, Cost, CostMap, CostPair};
use crate::error::{Result, StegoError};
use crate::jpeg::CoefficientPlane;
use crate::key::{KeyedStream, StegoKey};
use crate::lattice::{build_macro_schedule, build_schedule, LatticeSchedule, ScanStrategy};
use crate::robustness::{
    assemble_recompressed, initial_robust_map_from, probe_lattice, Label, LabelCounts, LatticeProbe, ProcessedSet,
    RobustEntry, RobustnessMap,
};
use crate::stc::{parity, simulate_embedding, stc_encode, stc_extract, CoverElement, StcParams, DEFAULT_HEIGHT};

/// Largest coefficient magnitude a change may produce.
const MAX_MAGNITUDE: i32 = 1023;

/// How the payload is split across lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spread {
    /// Whole-image solve on the initial robust set.
    InitialMap,
    /// Shares proportional to lattice size; skips the initial robust set.
    Equal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbedOptions {
    pub strategy: ScanStrategy,
    pub channel: ChannelSpec,
    pub cost_model: String,
    pub height: u8,
    pub spread: Spread,
    /// A lattice is asked to carry at most this fraction of its predicted
    /// robust coefficients.
    pub commit_ratio: f64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            strategy: ScanStrategy::LowHigh,
            channel: ChannelSpec::internal(None),
            cost_model: "quantstep".into(),
            height: DEFAULT_HEIGHT,
            spread: Spread::InitialMap,
            commit_ratio: 0.5,
        }
    }
}

/// What the receiver must know besides the key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractOptions {
    pub strategy: ScanStrategy,
    /// The channel filters, so the macro-lattice schedule was used.
    pub filtered: bool,
    pub height: u8,
}

impl From<&EmbedOptions> for ExtractOptions {
    fn from(o: &EmbedOptions) -> Self {
        ExtractOptions { strategy: o.strategy, filtered: o.channel.filter.is_some(), height: o.height }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub index: usize,
    pub members: usize,
    pub counts: LabelCounts,
    /// Message bits carried, link included.
    pub bits: usize,
    pub flips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub strategy: String,
    pub filtered: bool,
    pub lattices_total: usize,
    pub message_bits: usize,
    pub framed_bits: usize,
    /// Robust capacity of the cover in bits, when the initial map was built.
    pub capacity_bits: Option<f64>,
    pub initial_counts: Vec<LabelCounts>,
    pub lattices: Vec<LatticeReport>,
    pub flips: usize,
    pub compressor_calls: usize,
    pub verified: bool,
}

#[derive(Clone, Debug)]
pub struct Embedding {
    pub stego: CoefficientPlane,
    pub report: EmbedReport,
}

/// `ScanStrategy::Random { seed: 0 }` takes its seed from the key.
pub fn resolve_strategy(strategy: ScanStrategy, key: &StegoKey) -> ScanStrategy {
    match strategy {
        ScanStrategy::Random { seed: 0 } => ScanStrategy::Random { seed: key.schedule_seed() },
        s => s,
    }
}

pub fn schedule_for(plane: &CoefficientPlane, strategy: ScanStrategy, key: &StegoKey, filtered: bool) -> LatticeSchedule {
    let strategy = resolve_strategy(strategy, key);
    if filtered {
        build_macro_schedule(strategy, plane.blocks_x, plane.blocks_y)
    } else {
        build_schedule(strategy, plane.blocks_x, plane.blocks_y)
    }
}

/// Keyed order in which the coder visits the members of lattice `k`.
pub fn lattice_order(key: &StegoKey, k: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    KeyedStream::new("jstego/stc-order", key.stc_seed(k), 0).shuffle(&mut order);
    order
}

/// The element the coder sees for one classified coefficient.
fn cover_element(e: &RobustEntry, value: i32, costs: &CostMap) -> CoverElement {
    if e.label == Label::NonRobust {
        return CoverElement::wet(parity(e.predicted));
    }
    let pair = costs.get(e.block, e.mode);
    let live = |cost: Cost, ok: bool, d: i32| match cost {
        Cost::Dry(c) if ok && (value + d).abs() <= MAX_MAGNITUDE => Some(c),
        _ => None,
    };
    let plus = live(pair.plus, e.label.plus_ok(), 1);
    let minus = live(pair.minus, e.label.minus_ok(), -1);
    match (plus, minus) {
        (Some(p), Some(m)) if p < m || (p == m && value < 0) => CoverElement::dry(parity(value), p, 1),
        (Some(_), Some(m)) => CoverElement::dry(parity(value), m, -1),
        (Some(p), None) => CoverElement::dry(parity(value), p, 1),
        (None, Some(m)) => CoverElement::dry(parity(value), m, -1),
        (None, None) => CoverElement::wet(parity(value)),
    }
}

struct Planner<'a> {
    schedule: &'a LatticeSchedule,
    framing: Framing,
    cum_shares: Vec<f64>,
    initial_live: Option<Vec<usize>>,
    /// Robust fraction of the most recently classified lattice.
    last_fraction: f64,
    commit_ratio: f64,
    assigned: usize,
}

impl Planner<'_> {
    fn predicted_live(&self, k: usize) -> usize {
        match &self.initial_live {
            Some(live) => live[k],
            None => (self.last_fraction * self.schedule.lattice_blocks(k).len() as f64) as usize,
        }
    }

    /// Payload bits lattice `j` may be asked for, link excluded.
    fn payload_cap(&self, j: usize) -> usize {
        let lb = self.framing.link_bits();
        ((self.commit_ratio * self.predicted_live(j) as f64) as usize).saturating_sub(lb)
    }

    /// Pick the next lattice after `current` and its length for `remaining`
    /// payload bits.
    fn next_link(&mut self, current: usize, remaining: usize) -> Result<Link> {
        let lb = self.framing.link_bits();
        let lattices = self.schedule.num_lattices();
        let caps: Vec<usize> = (current + 1..lattices).map(|j| self.payload_cap(j)).collect();
        let mut after: usize = caps.iter().sum();
        let total: usize = caps.iter().sum();
        for (j, &cap) in (current + 1..lattices).zip(&caps) {
            after -= cap;
            let desired = (self.cum_shares[j] - self.assigned as f64).round().max(0.0) as usize;
            let needed = remaining.saturating_sub(after);
            let take = remaining.min(cap).min(desired.max(needed));
            // small chunks only when later lattices cannot absorb them
            if take > 0 && (take >= remaining.min(lb) || needed > 0) {
                self.assigned += take;
                return Ok(Link { next: j, len: take + lb });
            }
        }
        Err(StegoError::PayloadExceedsCapacity {
            requested: (self.assigned + remaining) as f64,
            capacity: (self.assigned + total) as f64,
        })
    }
}

/// Embed `message` into `cover` so that it survives `opts.channel`.
pub fn embed(cover: &CoefficientPlane, message: &[u8], key: &StegoKey, opts: &EmbedOptions) -> Result<Embedding> {
    let filtered = opts.channel.filter.is_some();
    let schedule = schedule_for(cover, opts.strategy, key, filtered);
    let rc = opts.channel.recompressor();
    let base = base_costs(cover, &opts.cost_model)?;
    let framing = Framing::for_schedule(&schedule);
    let lattices = schedule.num_lattices();
    let payload = bytes_to_bits(message);

    let mut report = EmbedReport {
        strategy: schedule.strategy().to_string(),
        filtered,
        lattices_total: lattices,
        message_bits: payload.len(),
        framed_bits: 0,
        capacity_bits: None,
        initial_counts: vec![],
        lattices: vec![],
        flips: 0,
        compressor_calls: 0,
        verified: false,
    };
    if payload.is_empty() {
        report.verified = true;
        return Ok(Embedding { stego: cover.clone(), report });
    }

    let r0_cover = rc.recompress(cover, &[])?;
    let (shares, initial_live) = match opts.spread {
        Spread::InitialMap => {
            let maps = initial_robust_map_from(cover, &r0_cover, &schedule, &rc)?;
            let mut robust = base.clone();
            maps.iter().for_each(|m| robust.apply_robustness(m));
            report.capacity_bits = Some(crate::costs::capacity(robust.pairs()));
            report.initial_counts = maps.iter().map(RobustnessMap::counts).collect();
            let plan = spread_payload(&base, &schedule, Some(&maps), payload.len() as f64)?;
            (plan.shares, Some(report.initial_counts.iter().map(LabelCounts::robust).collect()))
        }
        Spread::Equal => (spread_payload(&base, &schedule, None, payload.len() as f64)?.shares, None),
    };
    let cum_shares = shares
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    let mut planner = Planner {
        schedule: &schedule,
        framing,
        cum_shares,
        initial_live,
        last_fraction: 1.0,
        commit_ratio: opts.commit_ratio,
        assigned: 0,
    };

    let mut pseudo = cover.clone();
    let mut r0 = r0_cover;
    let mut processed = ProcessedSet::empty(schedule.num_blocks());
    let (mut k, mut len) = (0usize, framing.link_bits());
    let mut sent = 0usize;
    loop {
        let probe = probe_lattice(&pseudo, r0, &schedule, k, &processed, &rc)?;
        let counts = probe.map.counts();
        planner.last_fraction = counts.robust_fraction();

        let chunk = len - framing.link_bits();
        let remaining = payload.len() - sent - chunk;
        let link = if remaining == 0 { Link::END } else { planner.next_link(k, remaining)? };
        let mut bits = framing.encode(link);
        bits.extend_from_slice(&payload[sent..sent + chunk]);
        sent += chunk;

        let deltas = code_lattice(&pseudo, &probe, &base, key, k, &bits, opts.height)?;
        let flips = deltas.iter().filter(|&&d| d != 0).count();
        for (e, &d) in probe.map.entries.iter().zip(&deltas) {
            pseudo.blocks[e.block][e.mode as usize] += d as i32;
        }
        r0 = assemble_recompressed(&probe, &schedule, &deltas, filtered);
        processed.mark_lattice(&schedule, k);
        report.lattices.push(LatticeReport { index: k, members: deltas.len(), counts, bits: bits.len(), flips });
        report.flips += flips;
        report.framed_bits += bits.len();

        if link.is_end() {
            break;
        }
        (k, len) = (link.next, link.len);
    }

    let received = simulate_channel(&pseudo, &opts.channel, &rc)?;
    report.compressor_calls = rc.calls();
    if opts.channel.is_internal() {
        debug_assert_eq!(received, r0);
    }
    match extract(&received, key, &ExtractOptions::from(opts)) {
        Ok(m) if m == message => report.verified = true,
        Ok(_) => return Err(StegoError::ChannelMismatch("message does not survive the channel".into())),
        Err(e) => return Err(StegoError::ChannelMismatch(format!("extraction after the channel failed: {e}"))),
    }
    Ok(Embedding { stego: pseudo, report })
}

/// Run the coder on lattice `k` and return one delta per lattice member.
fn code_lattice(
    pseudo: &CoefficientPlane,
    probe: &LatticeProbe,
    base: &CostMap,
    key: &StegoKey,
    k: usize,
    bits: &[u8],
    height: u8,
) -> Result<Vec<i8>> {
    let entries = &probe.map.entries;
    let elements: Vec<CoverElement> =
        entries.iter().map(|e| cover_element(e, pseudo.blocks[e.block][e.mode as usize], base)).collect();
    let order = lattice_order(key, k, entries.len());
    let permuted: Vec<CoverElement> = order.iter().map(|&i| elements[i]).collect();
    let params = StcParams::new(height, key.stc_seed(k))?;
    let solution = stc_encode(&permuted, bits, &params).map_err(|e| match e {
        StegoError::EmbeddingInfeasible(msg) => StegoError::EmbeddingInfeasible(format!("lattice {k}: {msg}")),
        other => other,
    })?;
    let mut deltas = vec![0i8; entries.len()];
    for (pos, &i) in order.iter().enumerate() {
        if solution.flips[pos] {
            debug_assert!(!permuted[pos].cost.is_wet());
            deltas[i] = elements[i].delta;
        }
    }
    Ok(deltas)
}

fn read_lattice(received: &CoefficientPlane, schedule: &LatticeSchedule, key: &StegoKey, k: usize, m: usize, height: u8) -> Result<Vec<u8>> {
    let members = schedule.members(k);
    let order = lattice_order(key, k, members.len());
    let parities: Vec<u8> = order
        .iter()
        .map(|&i| {
            let (b, n) = members[i];
            parity(received.blocks[b][n as usize])
        })
        .collect();
    stc_extract(&parities, m, &StcParams::new(height, key.stc_seed(k))?)
}

/// Recover the message from the image the receiver downloaded.
pub fn extract(received: &CoefficientPlane, key: &StegoKey, opts: &ExtractOptions) -> Result<Vec<u8>> {
    let schedule = schedule_for(received, opts.strategy, key, opts.filtered);
    let framing = Framing::for_schedule(&schedule);
    let size = |j| schedule.lattice_blocks(j).len();
    let lb = framing.link_bits();
    if lb > size(0) {
        return Err(StegoError::InvalidLength("image too small to hold a link".into()));
    }
    let (mut k, mut len) = (0, lb);
    let mut payload = Vec::new();
    loop {
        let bits = read_lattice(received, &schedule, key, k, len, opts.height)?;
        let link = framing.decode(&bits, k, size)?;
        payload.extend_from_slice(&bits[lb..]);
        if link.is_end() {
            break;
        }
        (k, len) = (link.next, link.len);
    }
    bits_to_bytes(&payload)
}

/// Bits of each lattice read with explicit lengths, without framing.
pub fn extract_raw(received: &CoefficientPlane, key: &StegoKey, opts: &ExtractOptions, lengths: &[usize]) -> Result<Vec<u8>> {
    let schedule = schedule_for(received, opts.strategy, key, opts.filtered);
    if lengths.len() > schedule.num_lattices() {
        return Err(StegoError::InvalidLength(format!("{} lengths for {} lattices", lengths.len(), schedule.num_lattices())));
    }
    let mut out = Vec::new();
    for (k, &m) in lengths.iter().enumerate() {
        if m > 0 {
            out.extend(read_lattice(received, &schedule, key, k, m, opts.height)?);
        }
    }
    Ok(out)
}

/// Change-rate simulation instead of coding: every lattice with a share
/// draws its changes from the solved rates. Nothing can be extracted.
pub fn embed_simulated(
    cover: &CoefficientPlane,
    payload_bits: f64,
    key: &StegoKey,
    opts: &EmbedOptions,
    seed: u64,
) -> Result<Embedding> {
    let filtered = opts.channel.filter.is_some();
    let schedule = schedule_for(cover, opts.strategy, key, filtered);
    let rc = opts.channel.recompressor();
    let base = base_costs(cover, &opts.cost_model)?;
    let r0_cover = rc.recompress(cover, &[])?;
    let maps = match opts.spread {
        Spread::InitialMap => Some(initial_robust_map_from(cover, &r0_cover, &schedule, &rc)?),
        Spread::Equal => None,
    };
    let shares = spread_payload(&base, &schedule, maps.as_deref(), payload_bits)?.shares;

    let mut report = EmbedReport {
        strategy: schedule.strategy().to_string(),
        filtered,
        lattices_total: schedule.num_lattices(),
        message_bits: payload_bits as usize,
        framed_bits: 0,
        capacity_bits: None,
        initial_counts: maps.iter().flatten().map(RobustnessMap::counts).collect(),
        lattices: vec![],
        flips: 0,
        compressor_calls: 0,
        verified: false,
    };
    let mut pseudo = cover.clone();
    let mut r0 = r0_cover;
    let mut processed = ProcessedSet::empty(schedule.num_blocks());
    let mut carry = 0.0;
    for (k, &share) in shares.iter().enumerate() {
        let target = share + carry;
        if target < 0.5 {
            carry = target;
            continue;
        }
        let probe = probe_lattice(&pseudo, r0, &schedule, k, &processed, &rc)?;
        let mut robust = base.clone();
        robust.apply_robustness(&probe.map);
        let costs: Vec<CostPair> = probe
            .map
            .entries
            .iter()
            .map(|e| {
                let v = pseudo.blocks[e.block][e.mode as usize];
                let mut p = robust.get(e.block, e.mode);
                if (v + 1).abs() > MAX_MAGNITUDE {
                    p.plus = Cost::Wet;
                }
                if (v - 1).abs() > MAX_MAGNITUDE {
                    p.minus = Cost::Wet;
                }
                p
            })
            .collect();
        let achievable = target.min(0.999 * crate::costs::capacity(&costs));
        carry = target - achievable;
        let rates = solve_change_rates(&costs, achievable)?;
        let members: Vec<(usize, u8)> = probe.map.entries.iter().map(|e| (e.block, e.mode)).collect();
        let mods = simulate_embedding(&members, &rates.rates, seed ^ k as u64);
        let mut deltas = vec![0i8; members.len()];
        let index: std::collections::HashMap<usize, usize> =
            members.iter().enumerate().map(|(i, &(b, _))| (b, i)).collect();
        for m in &mods {
            deltas[index[&m.block]] = m.delta;
            pseudo.blocks[m.block][m.mode as usize] += m.delta as i32;
        }
        r0 = assemble_recompressed(&probe, &schedule, &deltas, filtered);
        processed.mark_lattice(&schedule, k);
        report.lattices.push(LatticeReport {
            index: k,
            members: members.len(),
            counts: probe.map.counts(),
            bits: achievable.round() as usize,
            flips: mods.len(),
        });
        report.flips += mods.len();
    }
    report.compressor_calls = rc.calls();
    Ok(Embedding { stego: pseudo, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::FilterSpec;
    use crate::jpeg::{quant_table_from_qf, recompress, PixelPlane};

    fn key() -> StegoKey {
        StegoKey::from_hex("a1b2c3d4e5f60718").unwrap()
    }

    fn flat(qf: u8, size: usize) -> CoefficientPlane {
        PixelPlane::new(size, size, vec![128; size * size]).unwrap().compress(&quant_table_from_qf(qf).unwrap())
    }

    fn textured(qf: u8, size: usize, seed: u64) -> CoefficientPlane {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let px = (0..size * size)
            .map(|i| {
                let (x, y) = ((i % size) as f64, (i / size) as f64);
                let v = 128.0 + 70.0 * (x / 9.0).sin() * (y / 13.0).cos() + rng.gen_range(-12.0..12.0);
                v.clamp(0.0, 255.0) as u8
            })
            .collect();
        PixelPlane::new(size, size, px).unwrap().compress(&quant_table_from_qf(qf).unwrap())
    }

    fn roundtrip(cover: &CoefficientPlane, msg: &[u8], opts: &EmbedOptions) -> Embedding {
        let e = embed(cover, msg, &key(), opts).unwrap();
        let received = recompress(&e.stego, &[], opts.channel.filter.as_ref()).unwrap();
        assert_eq!(extract(&received, &key(), &opts.into()).unwrap(), msg);
        e
    }

    #[test]
    fn flat_cover_sixteen_bytes() {
        let cover = flat(75, 64);
        let e = roundtrip(&cover, b"sixteen byte msg", &EmbedOptions::default());
        assert!(e.report.verified);
        assert!(e.report.flips > 0);
        assert!(e.report.compressor_calls <= 384);
    }

    #[test]
    fn empty_message_leaves_cover() {
        let cover = textured(85, 64, 1);
        let e = embed(&cover, b"", &key(), &EmbedOptions::default()).unwrap();
        assert_eq!(e.stego, cover);
        assert_eq!(e.report.compressor_calls, 0);
    }

    #[test]
    fn strategies_round_trip_and_only_touch_robust_positions() {
        let cover = textured(90, 128, 2);
        let msg: Vec<u8> = (0..120u8).collect();
        for strategy in [ScanStrategy::LowHigh, ScanStrategy::HighLow, ScanStrategy::Random { seed: 0 }] {
            for spread in [Spread::InitialMap, Spread::Equal] {
                let opts = EmbedOptions { strategy, spread, ..Default::default() };
                let e = roundtrip(&cover, &msg, &opts);
                assert!(e.report.compressor_calls <= 384, "{} calls", e.report.compressor_calls);
                let changed = (0..cover.num_blocks())
                    .flat_map(|b| (0..64).map(move |n| (b, n)))
                    .filter(|&(b, n)| e.stego.blocks[b][n] != cover.blocks[b][n])
                    .count();
                assert_eq!(changed, e.report.flips);
                assert!(e.stego.blocks.iter().flatten().zip(cover.blocks.iter().flatten()).all(|(a, b)| (a - b).abs() <= 1));
            }
        }
    }

    #[test]
    fn wrong_key_does_not_recover() {
        let cover = textured(75, 128, 3);
        let msg = [0x5au8; 24];
        let opts = EmbedOptions::default();
        let e = embed(&cover, &msg, &key(), &opts).unwrap();
        let received = recompress(&e.stego, &[], None).unwrap();
        let other = StegoKey::from_hex("00").unwrap();
        let got = extract(&received, &other, &(&opts).into());
        assert!(got.map_or(true, |m| m != msg));
    }

    #[test]
    fn extraction_needs_no_compressor() {
        // extract takes no recompressor at all; this only checks it reads
        // the same bits twice
        let cover = textured(80, 64, 4);
        let opts = EmbedOptions::default();
        let e = embed(&cover, b"abc", &key(), &opts).unwrap();
        let received = recompress(&e.stego, &[], None).unwrap();
        let once = extract(&received, &key(), &(&opts).into()).unwrap();
        assert_eq!(once, extract(&received, &key(), &(&opts).into()).unwrap());
    }

    #[test]
    fn filtered_channel_round_trips() {
        let size = 256;
        let px = (0..size * size)
            .map(|i| {
                let (x, y) = ((i % size) as f64, (i / size) as f64);
                (128.0 + 70.0 * (x / 40.0).sin() * (y / 53.0).cos()) as u8
            })
            .collect();
        let cover = PixelPlane::new(size, size, px).unwrap().compress(&quant_table_from_qf(75).unwrap());
        // sharpening leaves only a few dozen robust coefficients here
        for (filter, msg) in [(FilterSpec::gaussian3(), &b"filtered channel"[..]), (FilterSpec::sharpen3(), b"ok")] {
            let opts = EmbedOptions { channel: ChannelSpec::internal(Some(filter)), ..Default::default() };
            let e = roundtrip(&cover, msg, &opts);
            assert!(e.report.compressor_calls <= 3456, "{} calls", e.report.compressor_calls);
        }
    }

    #[test]
    fn oversized_payload_is_rejected() {
        let cover = textured(95, 64, 6);
        let msg = vec![0u8; 4000];
        assert!(matches!(
            embed(&cover, &msg, &key(), &EmbedOptions::default()),
            Err(StegoError::PayloadExceedsCapacity { .. })
        ));
    }

    #[test]
    fn second_pass_through_channel_keeps_message() {
        let cover = textured(92, 128, 7);
        let opts = EmbedOptions::default();
        let e = roundtrip(&cover, b"twice", &opts);
        let once = recompress(&e.stego, &[], None).unwrap();
        let twice = recompress(&once, &[], None).unwrap();
        assert_eq!(extract(&twice, &key(), &(&opts).into()).unwrap(), b"twice");
    }

    #[test]
    fn raw_extraction_reads_lattice_bits() {
        let cover = textured(85, 64, 8);
        let opts = EmbedOptions::default();
        let e = embed(&cover, b"raw", &key(), &opts).unwrap();
        let received = recompress(&e.stego, &[], None).unwrap();
        let mut lengths = vec![0; 64];
        for l in &e.report.lattices {
            lengths[l.index] = l.bits;
        }
        let raw = extract_raw(&received, &key(), &(&opts).into(), &lengths).unwrap();
        assert_eq!(raw.len(), e.report.framed_bits);
    }

    #[test]
    fn simulation_changes_only_robust_positions() {
        let cover = textured(75, 128, 9);
        let opts = EmbedOptions::default();
        let e = embed_simulated(&cover, 2000.0, &key(), &opts, 1).unwrap();
        assert!(e.report.flips > 0);
        assert!(e.report.compressor_calls <= 384);
    }
}
