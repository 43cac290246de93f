//! Binary syndrome-trellis codes with wet elements.
//!
//! The parity-check matrix is built from one keyed `h x w` submatrix placed
//! along the diagonal: message bit `j` is checked against a block of `w_j`
//! cover elements, and each column of the submatrix also reaches the `h - 1`
//! following message bits. Block widths are `floor((j+1) n / m) - floor(j n / m)`
//! so that any `m <= n` is covered exactly.
//!
//! The first message bits would otherwise depend on very few elements and
//! fail as soon as those are wet, so the trellis starts with up to `h - 1`
//! unconstrained rows whose values are discarded.

use crate::costs::{ChangeRate, Cost};
use crate::error::{Result, StegoError};
use crate::jpeg::Modification;
use crate::key::KeyedStream;

pub const DEFAULT_HEIGHT: u8 = 10;
pub const MAX_HEIGHT: u8 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StcParams {
    pub height: u8,
    pub seed: u64,
}

impl StcParams {
    pub fn new(height: u8, seed: u64) -> Result<Self> {
        if !(1..=MAX_HEIGHT).contains(&height) {
            return Err(StegoError::InvalidLength(format!("constraint height {height} outside 1..={MAX_HEIGHT}")));
        }
        Ok(StcParams { height, seed })
    }
}

/// One position of the cover as seen by the coder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverElement {
    /// Parity the receiver reads if the element is not flipped.
    pub parity: u8,
    /// Cost of flipping the parity; `Wet` fixes it.
    pub cost: Cost,
    /// Change that realizes a flip, `+1` or `-1` (0 when wet).
    pub delta: i8,
}

impl CoverElement {
    pub fn wet(parity: u8) -> Self {
        CoverElement { parity: parity & 1, cost: Cost::Wet, delta: 0 }
    }

    pub fn dry(parity: u8, cost: f64, delta: i8) -> Self {
        CoverElement { parity: parity & 1, cost: Cost::Dry(cost), delta }
    }
}

/// Parity of `v`, negative values included.
#[inline]
pub fn parity(v: i32) -> u8 {
    v.rem_euclid(2) as u8
}

fn block_bounds(n: usize, m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).map(move |j| (j * n / m, (j + 1) * n / m))
}

/// Columns of the submatrix, bit `r` being row `r` (row 0 meets the current
/// message bit). Top and bottom bits are always set.
pub fn submatrix(params: &StcParams, width: usize) -> Vec<u32> {
    let h = params.height as u32;
    let full = if h == 32 { u32::MAX } else { (1u32 << h) - 1 };
    let must = 1u32 | 1u32 << (h - 1);
    let mut rng = KeyedStream::new("jstego/stc", params.seed, 0);
    (0..width)
        .map(|_| loop {
            let c = rng.next_u64() as u32 & full;
            if c & must == must {
                break c;
            }
        })
        .collect()
}

/// Unconstrained leading rows used for a message of `m` bits.
pub fn free_rows(n: usize, m: usize, params: &StcParams) -> usize {
    if m == 0 {
        0
    } else {
        (params.height as usize - 1).min(n.saturating_sub(m))
    }
}

fn max_width(n: usize, m: usize) -> usize {
    block_bounds(n, m).map(|(a, b)| b - a).max().unwrap_or(0)
}

fn check_lengths(n: usize, m: usize) -> Result<()> {
    if m > n {
        return Err(StegoError::InvalidLength(format!("message of {m} bits exceeds cover of {n} elements")));
    }
    Ok(())
}

/// Dense `m x n` parity-check matrix, for testing and inspection.
pub fn parity_check_matrix(n: usize, m: usize, params: &StcParams) -> Result<Vec<Vec<u8>>> {
    check_lengths(n, m)?;
    let rows = m + free_rows(n, m, params);
    let cols = submatrix(params, max_width(n, rows));
    let mut h = vec![vec![0u8; n]; rows];
    for (j, (a, b)) in block_bounds(n, rows).enumerate() {
        for i in a..b {
            let col = cols[i - a];
            for r in 0..params.height as usize {
                if j + r < rows {
                    h[j + r][i] = (col >> r & 1) as u8;
                }
            }
        }
    }
    Ok(h.split_off(rows - m))
}

/// Message carried by `parities`.
pub fn stc_extract(parities: &[u8], m: usize, params: &StcParams) -> Result<Vec<u8>> {
    let n = parities.len();
    check_lengths(n, m)?;
    let free = free_rows(n, m, params);
    let rows = m + free;
    let cols = submatrix(params, max_width(n, rows));
    let mut state = 0u32;
    let mut out = Vec::with_capacity(rows);
    for (a, b) in block_bounds(n, rows) {
        for i in a..b {
            if parities[i] & 1 == 1 {
                state ^= cols[i - a];
            }
        }
        out.push((state & 1) as u8);
        state >>= 1;
    }
    Ok(out.split_off(free))
}

/// Outcome of a successful encode.
#[derive(Clone, Debug, PartialEq)]
pub struct StcSolution {
    /// `true` where the element's parity must flip.
    pub flips: Vec<bool>,
    pub cost: f64,
}

impl StcSolution {
    pub fn num_flips(&self) -> usize {
        self.flips.iter().filter(|&&f| f).count()
    }
}

/// Cheapest set of flips whose parities carry `message`.
pub fn stc_encode(cover: &[CoverElement], message: &[u8], params: &StcParams) -> Result<StcSolution> {
    let n = cover.len();
    let m = message.len();
    check_lengths(n, m)?;
    if m == 0 {
        return Ok(StcSolution { flips: vec![false; n], cost: 0.0 });
    }
    let free = free_rows(n, m, params);
    let rows = m + free;
    let cols = submatrix(params, max_width(n, rows));
    let states = 1usize << params.height;
    let words = states.div_ceil(64);
    // syndrome bit chosen for each free row, per surviving state
    let mut free_bits = vec![0u64; free * words];
    // path[i] holds, per state after element i, the stego parity chosen
    let mut path = vec![0u64; n * words];
    let mut cost = vec![f64::INFINITY; states];
    let mut next = vec![f64::INFINITY; states];
    cost[0] = 0.0;

    for (j, (a, b)) in block_bounds(n, rows).enumerate() {
        for i in a..b {
            let col = cols[i - a] as usize;
            let el = cover[i];
            let flip = match el.cost {
                Cost::Dry(c) => c,
                Cost::Wet => f64::INFINITY,
            };
            // cost of stego parity 0 and 1
            let (c0, c1) = if el.parity & 1 == 0 { (0.0, flip) } else { (flip, 0.0) };
            let row = &mut path[i * words..(i + 1) * words];
            for s in 0..states {
                let keep = cost[s] + c0;
                let take = cost[s ^ col] + c1;
                if take < keep {
                    next[s] = take;
                    row[s / 64] |= 1 << (s % 64);
                } else {
                    next[s] = keep;
                }
            }
            std::mem::swap(&mut cost, &mut next);
        }
        if j < free {
            let row = &mut free_bits[j * words..(j + 1) * words];
            for t in 0..states / 2 {
                let (c0, c1) = (cost[t << 1], cost[(t << 1) | 1]);
                if c1 < c0 {
                    next[t] = c1;
                    row[t / 64] |= 1 << (t % 64);
                } else {
                    next[t] = c0;
                }
            }
        } else {
            let bit = (message[j - free] & 1) as usize;
            for t in 0..states / 2 {
                next[t] = cost[(t << 1) | bit];
            }
        }
        for v in &mut next[states / 2..] {
            *v = f64::INFINITY;
        }
        std::mem::swap(&mut cost, &mut next);
    }

    let (mut state, best) = cost
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (s, &c)| if c < acc.1 { (s, c) } else { acc });
    if !best.is_finite() {
        return Err(StegoError::EmbeddingInfeasible(format!(
            "no flip pattern of {n} elements carries the {m}-bit message"
        )));
    }

    let mut flips = vec![false; n];
    let bounds: Vec<(usize, usize)> = block_bounds(n, rows).collect();
    for (j, &(a, b)) in bounds.iter().enumerate().rev() {
        let bit = if j < free {
            (free_bits[j * words + state / 64] >> (state % 64) & 1) as usize
        } else {
            (message[j - free] & 1) as usize
        };
        state = (state << 1) | bit;
        for i in (a..b).rev() {
            let x = (path[i * words + state / 64] >> (state % 64) & 1) as u8;
            flips[i] = x != cover[i].parity & 1;
            if x == 1 {
                state ^= cols[i - a] as usize;
            }
        }
    }
    debug_assert_eq!(state, 0);
    Ok(StcSolution { flips, cost: best })
}

/// Draw changes directly from the change rates, as an optimal coder would
/// realize them on average.
pub fn simulate_embedding(members: &[(usize, u8)], rates: &[ChangeRate], seed: u64) -> Vec<Modification> {
    assert_eq!(members.len(), rates.len());
    let mut rng = KeyedStream::new("jstego/simulate", seed, 0);
    members
        .iter()
        .zip(rates)
        .filter_map(|(&(b, n), r)| {
            let u = rng.unit();
            if u < r.plus {
                Some(Modification::new(b, n, 1))
            } else if u < r.plus + r.minus {
                Some(Modification::new(b, n, -1))
            } else {
                None
            }
        })
        .collect()
}
