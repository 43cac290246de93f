use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StegoError};

/// Natural (row-major) index of the coefficient at each zigzag position.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Annex K luminance table, natural order.
pub const ANNEX_K_LUMINANCE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// 64 quantization steps, stored in natural order.
///
/// Files and DQT segments carry the steps in zigzag order; use
/// [`QuantTable::from_zigzag`] / [`QuantTable::to_zigzag`] at those boundaries.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantTable {
    steps: [u16; 64],
}

impl QuantTable {
    pub fn new(steps: [u16; 64]) -> Result<Self> {
        if let Some(pos) = steps.iter().position(|&s| s == 0 || s > 255) {
            return Err(StegoError::InvalidQuantTable(format!(
                "step {} at natural index {pos} outside 1..=255",
                steps[pos]
            )));
        }
        Ok(QuantTable { steps })
    }

    pub fn from_zigzag(zz: &[u16; 64]) -> Result<Self> {
        let mut steps = [0u16; 64];
        for (k, &n) in ZIGZAG.iter().enumerate() {
            steps[n] = zz[k];
        }
        Self::new(steps)
    }

    pub fn to_zigzag(&self) -> [u16; 64] {
        let mut zz = [0u16; 64];
        for (k, &n) in ZIGZAG.iter().enumerate() {
            zz[k] = self.steps[n];
        }
        zz
    }

    pub fn annex_k() -> Self {
        QuantTable { steps: ANNEX_K_LUMINANCE }
    }

    /// IJG quality scaling of `base` (natural order).
    pub fn from_quality(qf: u8, base: &[u16; 64]) -> Result<Self> {
        if !(1..=100).contains(&qf) {
            return Err(StegoError::InvalidQuality(qf as i64));
        }
        let qf = qf as u32;
        let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
        let mut steps = [0u16; 64];
        for (s, &b) in steps.iter_mut().zip(base.iter()) {
            let v = (b as u32 * scale + 50) / 100;
            *s = v.clamp(1, 255) as u16;
        }
        Ok(QuantTable { steps })
    }

    /// Step for the coefficient at natural index `mode`.
    #[inline]
    pub fn step(&self, mode: usize) -> u16 {
        self.steps[mode]
    }

    pub fn steps(&self) -> &[u16; 64] {
        &self.steps
    }

    /// Parse the text format: 64 whitespace-separated integers in zigzag order.
    pub fn parse_text(text: &str) -> Result<Self> {
        let values: Vec<u16> = text
            .split_whitespace()
            .map(|t| {
                t.parse::<u16>()
                    .map_err(|_| StegoError::InvalidQuantTable(format!("not an integer: '{t}'")))
            })
            .collect::<Result<_>>()?;
        let zz: [u16; 64] = values.as_slice().try_into().map_err(|_| {
            StegoError::InvalidQuantTable(format!("expected 64 values, found {}", values.len()))
        })?;
        Self::from_zigzag(&zz)
    }

    pub fn to_text(&self) -> String {
        let zz = self.to_zigzag();
        let mut out = String::new();
        for row in zz.chunks(8) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// `quant_table_from_qf` with the Annex K base table.
pub fn quant_table_from_qf(qf: u8) -> Result<QuantTable> {
    QuantTable::from_quality(qf, &ANNEX_K_LUMINANCE)
}

impl fmt::Debug for QuantTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantTable")
            .field("steps", &&self.steps[..])
            .finish()
    }
}

impl FromStr for QuantTable {
    type Err = StegoError;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

/// Round-half-away-from-zero quantization of 64 raw DCT values.
pub fn quantize(raw: &[f64; 64], table: &QuantTable) -> [i32; 64] {
    let mut out = [0i32; 64];
    for n in 0..64 {
        out[n] = (raw[n] / table.steps[n] as f64).round() as i32;
    }
    out
}

pub fn dequantize(coeffs: &[i32; 64], table: &QuantTable) -> [f64; 64] {
    let mut out = [0f64; 64];
    for n in 0..64 {
        out[n] = (coeffs[n] * table.steps[n] as i32) as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zigzag_by_walking() -> Vec<usize> {
        // walk the anti-diagonals, alternating direction
        let mut out = Vec::new();
        for s in 0..15usize {
            let mut diag: Vec<(usize, usize)> = (0..8)
                .filter_map(|r| s.checked_sub(r).filter(|&c| c < 8).map(|c| (r, c)))
                .collect();
            if s % 2 == 0 {
                diag.reverse();
            }
            out.extend(diag.into_iter().map(|(r, c)| r * 8 + c));
        }
        out
    }

    #[test]
    fn zigzag_matches_diagonal_walk() {
        assert_eq!(ZIGZAG.to_vec(), zigzag_by_walking());
    }

    #[test]
    fn qf50_is_base_table() {
        let t = quant_table_from_qf(50).unwrap();
        assert_eq!(t.steps(), &ANNEX_K_LUMINANCE);
    }

    #[test]
    fn qf100_is_all_ones() {
        let t = quant_table_from_qf(100).unwrap();
        assert!(t.steps().iter().all(|&s| s == 1));
    }

    #[test]
    fn qf75_dc_step() {
        // (16 * 50 + 50) / 100 = 8
        assert_eq!(quant_table_from_qf(75).unwrap().step(0), 8);
    }

    #[test]
    fn low_quality_clamps_to_255() {
        let t = quant_table_from_qf(1).unwrap();
        assert!(t.steps().iter().all(|&s| s == 255));
    }

    #[test]
    fn out_of_range_quality() {
        assert_eq!(quant_table_from_qf(0), Err(StegoError::InvalidQuality(0)));
        assert_eq!(quant_table_from_qf(101), Err(StegoError::InvalidQuality(101)));
    }

    #[test]
    fn text_round_trip_is_zigzag() {
        let t = quant_table_from_qf(85).unwrap();
        let text = t.to_text();
        let first: u16 = text.split_whitespace().nth(2).unwrap().parse().unwrap();
        // third zigzag entry is natural index 8
        assert_eq!(first, t.step(8));
        assert_eq!(QuantTable::parse_text(&text).unwrap(), t);
    }

    #[test]
    fn text_rejects_bad_counts_and_zero() {
        assert!(QuantTable::parse_text("1 2 3").is_err());
        let mut zeros = vec!["1"; 63];
        zeros.push("0");
        assert!(QuantTable::parse_text(&zeros.join(" ")).is_err());
    }

    #[test]
    fn tie_rounds_away_from_zero() {
        let t = QuantTable::new([16; 64]).unwrap();
        let mut raw = [0f64; 64];
        raw[0] = 24.0;
        raw[1] = -24.0;
        let q = quantize(&raw, &t);
        assert_eq!((q[0], q[1]), (2, -2));
        assert!(q[2..].iter().all(|&v| v == 0));
        assert_eq!(dequantize(&q, &t)[0], 32.0);
    }
}
