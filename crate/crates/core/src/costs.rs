//! Embedding costs, the robust cost update and the change-rate solver.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::jpeg::CoefficientPlane;
use crate::lattice::LatticeSchedule;
use crate::robustness::{Label, RobustnessMap};

pub const LOG2_3: f64 = 1.584_962_500_721_156_3;

const LAMBDA_LO: f64 = 1e-12;
const LAMBDA_HI: f64 = 1e12;
const MAX_ITERATIONS: usize = 200;
const REL_TOL: f64 = 1e-8;

/// Cost of one change direction. `Wet` forbids the change outright.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cost {
    Dry(f64),
    Wet,
}

impl Cost {
    pub fn is_wet(self) -> bool {
        matches!(self, Cost::Wet)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Cost::Dry(v) => Some(v),
            Cost::Wet => None,
        }
    }

    /// `exp(-lambda * rho)`, exactly 0 when wet.
    #[inline]
    fn weight(self, lambda: f64) -> f64 {
        match self {
            Cost::Dry(_) if lambda == f64::INFINITY => 0.0,
            Cost::Dry(rho) => (-lambda * rho).exp(),
            Cost::Wet => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPair {
    pub plus: Cost,
    pub minus: Cost,
}

impl CostPair {
    pub fn symmetric(rho: f64) -> Self {
        CostPair { plus: Cost::Dry(rho), minus: Cost::Dry(rho) }
    }

    pub const WET: CostPair = CostPair { plus: Cost::Wet, minus: Cost::Wet };

    pub fn live_directions(&self) -> u8 {
        !self.plus.is_wet() as u8 + !self.minus.is_wet() as u8
    }

    /// Largest entropy this coefficient can carry.
    pub fn max_entropy(&self) -> f64 {
        match self.live_directions() {
            2 => LOG2_3,
            1 => 1.0,
            _ => 0.0,
        }
    }

    fn wet_where(self, label: Label) -> Self {
        CostPair {
            plus: if label.plus_ok() { self.plus } else { Cost::Wet },
            minus: if label.minus_ok() { self.minus } else { Cost::Wet },
        }
    }
}

/// One cost pair per coefficient, indexed `block * 64 + mode`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMap {
    pairs: Vec<CostPair>,
}

impl CostMap {
    pub fn new(pairs: Vec<CostPair>) -> Self {
        assert_eq!(pairs.len() % 64, 0, "cost map must cover whole blocks");
        CostMap { pairs }
    }

    pub fn num_blocks(&self) -> usize {
        self.pairs.len() / 64
    }

    pub fn get(&self, block: usize, mode: u8) -> CostPair {
        self.pairs[block * 64 + mode as usize]
    }

    pub fn set(&mut self, block: usize, mode: u8, pair: CostPair) {
        self.pairs[block * 64 + mode as usize] = pair;
    }

    pub fn pairs(&self) -> &[CostPair] {
        &self.pairs
    }

    /// Wet out every direction `robust` does not allow. Wet stays wet.
    pub fn apply_robustness(&mut self, robust: &RobustnessMap) {
        for e in &robust.entries {
            let i = e.block * 64 + e.mode as usize;
            self.pairs[i] = self.pairs[i].wet_where(e.label);
        }
    }

    /// Costs of the lattice members in `robust`, in its entry order.
    pub fn lattice_costs(&self, robust: &RobustnessMap) -> Vec<CostPair> {
        robust.entries.iter().map(|e| self.get(e.block, e.mode)).collect()
    }
}

/// Robust costs: unchanged for `Both`, one side wet for single-direction
/// labels, fully wet for `NonRobust`.
pub fn robust_cost_update(costs: &CostMap, robust: &RobustnessMap) -> CostMap {
    let mut out = costs.clone();
    out.apply_robustness(robust);
    out
}

/// A named source of base costs.
pub trait CostModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn costs(&self, cover: &CoefficientPlane) -> CostMap;
}

/// `rho+ = rho- = q_n`: the quantization step of the mode.
pub struct QuantStep;

impl CostModel for QuantStep {
    fn name(&self) -> &'static str {
        "quantstep"
    }

    fn costs(&self, cover: &CoefficientPlane) -> CostMap {
        let per_block: Vec<CostPair> =
            (0..64).map(|n| CostPair::symmetric(cover.table.step(n) as f64)).collect();
        CostMap::new(per_block.repeat(cover.num_blocks()))
    }
}

/// Every direction costs 1.
pub struct Uniform;

impl CostModel for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn costs(&self, cover: &CoefficientPlane) -> CostMap {
        CostMap::new(vec![CostPair::symmetric(1.0); cover.num_blocks() * 64])
    }
}

pub const COST_MODELS: [&str; 2] = ["quantstep", "uniform"];

pub fn cost_model(name: &str) -> Result<Box<dyn CostModel>> {
    match name.to_ascii_lowercase().as_str() {
        "quantstep" => Ok(Box::new(QuantStep)),
        "uniform" => Ok(Box::new(Uniform)),
        _ => Err(StegoError::UnknownCostModel(name.to_string())),
    }
}

pub fn base_costs(cover: &CoefficientPlane, model: &str) -> Result<CostMap> {
    Ok(cost_model(model)?.costs(cover))
}

/// Probabilities of a +1 and a -1 change.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangeRate {
    pub plus: f64,
    pub minus: f64,
}

impl ChangeRate {
    pub fn entropy(&self) -> f64 {
        h3(self.plus, self.minus)
    }
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln() / LN_2
    } else {
        0.0
    }
}

#[inline]
fn h3(p: f64, m: f64) -> f64 {
    -(xlog2x((1.0 - p - m).max(0.0)) + xlog2x(p) + xlog2x(m))
}

/// Ternary entropy in bits.
pub fn ternary_entropy(plus: f64, minus: f64) -> Result<f64> {
    let ok = |x: f64| x.is_finite() && x >= 0.0;
    if !ok(plus) || !ok(minus) || plus + minus > 1.0 + 1e-12 {
        return Err(StegoError::InvalidRates(format!("({plus}, {minus})")));
    }
    Ok(h3(plus, minus))
}

/// Gibbs rates of one coefficient at multiplier `lambda`.
#[inline]
pub fn rate_at(pair: CostPair, lambda: f64) -> ChangeRate {
    let wp = pair.plus.weight(lambda);
    let wm = pair.minus.weight(lambda);
    let z = 1.0 + wp + wm;
    ChangeRate { plus: wp / z, minus: wm / z }
}

pub fn rates_at(costs: &[CostPair], lambda: f64) -> Vec<ChangeRate> {
    costs.iter().map(|&c| rate_at(c, lambda)).collect()
}

fn entropy_at(costs: &[CostPair], lambda: f64) -> f64 {
    costs.iter().map(|&c| rate_at(c, lambda).entropy()).sum()
}

pub fn capacity(costs: &[CostPair]) -> f64 {
    costs.iter().map(CostPair::max_entropy).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChangeRateMap {
    /// Multiplier the rates were evaluated at; `f64::INFINITY` for a zero
    /// target, 0 when the target saturates capacity.
    pub lambda: f64,
    pub rates: Vec<ChangeRate>,
}

impl ChangeRateMap {
    pub fn entropy(&self) -> f64 {
        self.rates.iter().map(ChangeRate::entropy).sum()
    }
}

/// Find `lambda` with `sum H3(beta(lambda)) = target_bits` by bisection on
/// `ln lambda`.
pub fn solve_lambda(costs: &[CostPair], target_bits: f64) -> Result<f64> {
    let cap = capacity(costs);
    if target_bits.is_nan() || target_bits < 0.0 {
        return Err(StegoError::InvalidRates(format!("target {target_bits}")));
    }
    if target_bits == 0.0 {
        return Ok(f64::INFINITY);
    }
    if target_bits > cap * (1.0 + REL_TOL) || cap == 0.0 {
        return Err(StegoError::PayloadExceedsCapacity { requested: target_bits, capacity: cap });
    }
    if target_bits >= cap * (1.0 - REL_TOL) {
        return Ok(0.0);
    }
    let close = |h: f64| (h - target_bits).abs() <= REL_TOL * target_bits;

    let (mut lo, mut hi) = (LAMBDA_LO, LAMBDA_HI);
    let mut iterations = 0;
    // entropy falls as lambda grows
    while entropy_at(costs, lo) < target_bits {
        lo /= 1e3;
        iterations += 1;
        if lo == 0.0 || iterations > MAX_ITERATIONS {
            return Ok(0.0);
        }
    }
    while entropy_at(costs, hi) > target_bits {
        hi *= 1e3;
        iterations += 1;
        if !hi.is_finite() || iterations > MAX_ITERATIONS {
            return Err(StegoError::SolverNoConverge(iterations));
        }
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = (lo * hi).sqrt();
        let h = entropy_at(costs, mid);
        if close(h) {
            return Ok(mid);
        }
        if h > target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (entropy_at(costs, lo) - target_bits).abs() < (entropy_at(costs, hi) - target_bits).abs() {
        lo
    } else {
        hi
    };
    if close(entropy_at(costs, best)) {
        Ok(best)
    } else {
        Err(StegoError::SolverNoConverge(MAX_ITERATIONS))
    }
}

pub fn solve_change_rates(costs: &[CostPair], target_bits: f64) -> Result<ChangeRateMap> {
    let lambda = solve_lambda(costs, target_bits)?;
    Ok(ChangeRateMap { lambda, rates: rates_at(costs, lambda) })
}

/// How a payload size is expressed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "value", rename_all = "lowercase")]
pub enum Payload {
    Bits(f64),
    /// Bits per nonzero AC coefficient of the cover.
    Bpnzac(f64),
}

impl Payload {
    pub fn bits(&self, cover: &CoefficientPlane) -> f64 {
        match *self {
            Payload::Bits(b) => b,
            Payload::Bpnzac(r) => r * cover.nonzero_ac() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayloadPlan {
    pub total_bits: f64,
    pub unit: &'static str,
    /// Bits assigned to each lattice, in schedule order.
    pub shares: Vec<f64>,
}

/// Split `total_bits` over the lattices of `schedule`.
///
/// With initial maps the whole image is solved at once and each lattice
/// receives the entropy its coefficients carry at the common multiplier.
/// Without them (`equal_spread`) every lattice receives a share proportional
/// to its member count.
pub fn spread_payload(
    base: &CostMap,
    schedule: &LatticeSchedule,
    initial_maps: Option<&[RobustnessMap]>,
    total_bits: f64,
) -> Result<PayloadPlan> {
    let lattices = schedule.num_lattices();
    let plan = |shares| PayloadPlan { total_bits, unit: "bits", shares };
    if total_bits == 0.0 {
        return Ok(plan(vec![0.0; lattices]));
    }
    match initial_maps {
        Some(maps) => {
            assert_eq!(maps.len(), lattices, "one map per lattice");
            let mut robust = base.clone();
            for m in maps {
                robust.apply_robustness(m);
            }
            let per_lattice: Vec<Vec<CostPair>> = maps.iter().map(|m| robust.lattice_costs(m)).collect();
            let all: Vec<CostPair> = per_lattice.iter().flatten().copied().collect();
            let lambda = solve_lambda(&all, total_bits)?;
            let shares = per_lattice.iter().map(|c| entropy_at(c, lambda)).collect();
            Ok(plan(shares))
        }
        None => {
            let sizes: Vec<usize> = (0..lattices).map(|k| schedule.lattice_blocks(k).len()).collect();
            let n: usize = sizes.iter().sum();
            let cap = n as f64 * LOG2_3;
            if total_bits > cap {
                return Err(StegoError::PayloadExceedsCapacity { requested: total_bits, capacity: cap });
            }
            Ok(plan(sizes.iter().map(|&s| total_bits * s as f64 / n as f64).collect()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::{quant_table_from_qf, PixelPlane, Recompressor};
    use crate::lattice::{build_schedule, ScanStrategy};
    use crate::robustness::{initial_robust_map, RobustEntry};
    use proptest::prelude::*;

    fn map_of(labels: &[Label]) -> RobustnessMap {
        RobustnessMap {
            lattice: 0,
            entries: labels
                .iter()
                .enumerate()
                .map(|(b, &label)| RobustEntry { block: b, mode: 0, label, predicted: 0 })
                .collect(),
        }
    }

    #[test]
    fn quantstep_dc_at_qf50_is_16() {
        let cover = CoefficientPlane::zeros(16, 8, quant_table_from_qf(50).unwrap());
        let c = base_costs(&cover, "quantstep").unwrap();
        assert_eq!(c.get(1, 0), CostPair::symmetric(16.0));
        assert!(c.pairs().iter().all(|p| p.plus == p.minus && p.plus.value().unwrap() > 0.0));
        assert_eq!(base_costs(&cover, "UERD"), Err(StegoError::UnknownCostModel("UERD".into())));
    }

    #[test]
    fn robust_update_cases() {
        let base = CostMap::new(vec![CostPair { plus: Cost::Dry(2.0), minus: Cost::Dry(3.0) }; 4 * 64]);
        let labels = [Label::Both, Label::PlusOnly, Label::MinusOnly, Label::NonRobust];
        let out = robust_cost_update(&base, &map_of(&labels));
        assert_eq!(out.get(0, 0), base.get(0, 0));
        assert_eq!(out.get(1, 0), CostPair { plus: Cost::Dry(2.0), minus: Cost::Wet });
        assert_eq!(out.get(2, 0), CostPair { plus: Cost::Wet, minus: Cost::Dry(3.0) });
        assert_eq!(out.get(3, 0), CostPair::WET);
        assert_eq!(out.get(3, 1), base.get(3, 1));
        // wet is absorbing
        let again = robust_cost_update(&out, &map_of(&[Label::Both; 4]));
        assert_eq!(again, out);
        assert_eq!(capacity(&out.lattice_costs(&map_of(&labels))), LOG2_3 + 2.0);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(ternary_entropy(0.0, 0.0).unwrap(), 0.0);
        assert!((ternary_entropy(1.0 / 3.0, 1.0 / 3.0).unwrap() - 1.584_962_5).abs() < 1e-7);
        assert!((ternary_entropy(0.5, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(ternary_entropy(0.7, 0.4).is_err());
        assert!(ternary_entropy(-0.1, 0.0).is_err());
        assert!((LOG2_3 - 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn saturating_target_gives_thirds() {
        let costs = vec![CostPair::symmetric(5.0); 100];
        let r = solve_change_rates(&costs, 100.0 * LOG2_3).unwrap();
        for c in &r.rates {
            assert!((c.plus - 1.0 / 3.0).abs() < 1e-9 && (c.minus - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_target_and_overflow() {
        let costs = vec![CostPair::symmetric(1.0); 10];
        let r = solve_change_rates(&costs, 0.0).unwrap();
        assert!(r.rates.iter().all(|c| c.plus == 0.0 && c.minus == 0.0));
        assert_eq!(r.entropy(), 0.0);
        match solve_change_rates(&costs, 20.0) {
            Err(StegoError::PayloadExceedsCapacity { capacity, .. }) => {
                assert!((capacity - 10.0 * LOG2_3).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            solve_change_rates(&[CostPair::WET; 3], 0.5),
            Err(StegoError::PayloadExceedsCapacity { .. })
        ));
    }

    #[test]
    fn cheap_coefficient_changes_more() {
        let costs = [CostPair::symmetric(1.0), CostPair::symmetric(10.0)];
        for target in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let r = solve_change_rates(&costs, target).unwrap();
            assert!(r.rates[0].plus > r.rates[1].plus);
            assert!((r.entropy() - target).abs() <= 1e-8 * target, "target {target}: {}", r.entropy());
        }
    }

    #[test]
    fn entropy_is_monotone_in_lambda() {
        let costs: Vec<CostPair> = (1..50).map(|i| CostPair::symmetric(i as f64 * 0.37)).collect();
        let mut prev = f64::INFINITY;
        for e in -6..3 {
            let h = entropy_at(&costs, 10f64.powi(e));
            assert!(h < prev);
            prev = h;
        }
    }

    fn cost_strategy() -> impl Strategy<Value = CostPair> {
        let side = prop_oneof![1 => Just(Cost::Wet), 4 => (0.01f64..100.0).prop_map(Cost::Dry)];
        (side.clone(), side).prop_map(|(plus, minus)| CostPair { plus, minus })
    }

    proptest! {
        #[test]
        fn solver_hits_target_and_respects_wet(
            costs in prop::collection::vec(cost_strategy(), 1..200),
            frac in 0.001f64..0.999,
        ) {
            let cap = capacity(&costs);
            prop_assume!(cap > 0.0);
            let target = frac * cap;
            let r = solve_change_rates(&costs, target).unwrap();
            prop_assert!((r.entropy() - target).abs() <= 1e-8 * target);
            for (c, b) in costs.iter().zip(&r.rates) {
                if c.plus.is_wet() { prop_assert_eq!(b.plus, 0.0); }
                if c.minus.is_wet() { prop_assert_eq!(b.minus, 0.0); }
                prop_assert!(b.plus + b.minus <= 1.0);
            }
            // rates are a pure function of lambda
            prop_assert_eq!(rates_at(&costs, r.lambda), r.rates);
        }
    }

    fn textured(qf: u8) -> CoefficientPlane {
        let px = (0..64 * 64)
            .map(|i| {
                let (x, y) = ((i % 64) as f64, (i / 64) as f64);
                (128.0 + 60.0 * (x / 7.0).sin() * (y / 5.0).cos() + 20.0 * ((x + y) / 3.0).sin()) as u8
            })
            .collect();
        PixelPlane::new(64, 64, px).unwrap().compress(&quant_table_from_qf(qf).unwrap())
    }

    #[test]
    fn spread_partitions_total() {
        let cover = textured(75);
        let s = build_schedule(ScanStrategy::LowHigh, 8, 8);
        let maps = initial_robust_map(&cover, &s, &Recompressor::new(None)).unwrap();
        let base = base_costs(&cover, "quantstep").unwrap();
        for total in [0.0, 100.0, 1500.0] {
            let plan = spread_payload(&base, &s, Some(&maps), total).unwrap();
            let sum: f64 = plan.shares.iter().sum();
            assert!((sum - total).abs() <= 1e-6 * total.max(1.0));
        }
        let plan = spread_payload(&base, &s, Some(&maps), 1500.0).unwrap();
        let top16: f64 = plan.shares[..16].iter().sum();
        assert!(top16 > 0.5 * 1500.0);
        let eq = spread_payload(&base, &s, None, 640.0).unwrap();
        assert!(eq.shares.iter().all(|&a| (a - 10.0).abs() < 1e-12));
        assert!(spread_payload(&base, &s, Some(&maps), 1e6).is_err());
    }

    #[test]
    fn bpnzac_counts_nonzero_ac() {
        let mut cover = CoefficientPlane::zeros(8, 8, quant_table_from_qf(75).unwrap());
        cover.blocks[0][0] = 9;
        cover.blocks[0][1] = -2;
        cover.blocks[0][9] = 1;
        assert_eq!(Payload::Bpnzac(0.5).bits(&cover), 1.0);
        assert_eq!(Payload::Bits(7.0).bits(&cover), 7.0);
    }
}
