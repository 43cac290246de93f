use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::dct::{forward_block, inverse_block};
use super::plane::{validate_mods, CoefficientPlane, Modification};
use super::quant::{dequantize, quantize, QuantTable};
use crate::error::Result;
use crate::filter::FilterSpec;

/// Decompress one block to pixels and compress it again with the same table.
#[inline]
pub fn recompress_block(coeffs: &[i32; 64], table: &QuantTable) -> [i32; 64] {
    quantize(&forward_block(&inverse_block(&dequantize(coeffs, table))), table)
}

/// `R(c, mods)`: apply `mods`, decompress, optionally filter, recompress.
///
/// Without a filter the result is computed block by block.
pub fn recompress(
    plane: &CoefficientPlane,
    mods: &[Modification],
    filter: Option<&FilterSpec>,
) -> Result<CoefficientPlane> {
    let mut work = plane.clone();
    if !mods.is_empty() {
        validate_mods(plane, mods)?;
        for m in mods {
            work.blocks[m.block][m.mode as usize] += m.delta as i32;
        }
    }
    Ok(recompress_owned(work, filter))
}

fn recompress_owned(mut work: CoefficientPlane, filter: Option<&FilterSpec>) -> CoefficientPlane {
    match filter {
        None => {
            let table = work.table;
            work.blocks
                .par_iter_mut()
                .with_min_len(64)
                .for_each(|b| *b = recompress_block(b, &table));
            work
        }
        Some(f) => {
            let filtered = f.apply(&work.decompress());
            let mut out = filtered.compress(&work.table);
            out.width = work.width;
            out.height = work.height;
            out.quality = work.quality;
            out
        }
    }
}

/// The internal JPEG coder as a channel, with an invocation counter.
///
/// Every call to [`Recompressor::recompress`] counts as one call to the
/// compressor.
#[derive(Debug, Default)]
pub struct Recompressor {
    filter: Option<FilterSpec>,
    calls: AtomicUsize,
}

impl Recompressor {
    pub fn new(filter: Option<FilterSpec>) -> Self {
        Recompressor { filter, calls: AtomicUsize::new(0) }
    }

    pub fn filter(&self) -> Option<&FilterSpec> {
        self.filter.as_ref()
    }

    pub fn recompress(
        &self,
        plane: &CoefficientPlane,
        mods: &[Modification],
    ) -> Result<CoefficientPlane> {
        let out = recompress(plane, mods, self.filter.as_ref())?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    /// Recompress with every position in `positions` shifted by `delta`.
    /// Positions must be distinct.
    pub fn recompress_shifted(
        &self,
        plane: &CoefficientPlane,
        positions: &[(usize, u8)],
        delta: i32,
    ) -> CoefficientPlane {
        let mut work = plane.clone();
        for &(b, n) in positions {
            work.blocks[b][n as usize] += delta;
        }
        let out = recompress_owned(work, self.filter.as_ref());
        self.calls.fetch_add(1, Ordering::Relaxed);
        out
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}
