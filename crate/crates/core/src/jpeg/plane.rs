use serde::{Deserialize, Serialize};

use super::dct::{forward_block, inverse_block};
use super::quant::{dequantize, quantize, QuantTable};
use crate::error::{Result, StegoError};

/// Grayscale raster whose dimensions are multiples of 8.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelPlane {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl PixelPlane {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(8) || !height.is_multiple_of(8) {
            return Err(StegoError::InvalidLength(format!(
                "pixel plane {width}x{height} must be a positive multiple of 8"
            )));
        }
        if samples.len() != width * height {
            return Err(StegoError::InvalidLength(format!(
                "expected {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(PixelPlane { width, height, samples })
    }

    /// Pads an arbitrary raster to multiples of 8 by replicating the last
    /// row and column.
    pub fn from_raster(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(StegoError::InvalidLength(format!(
                "raster {width}x{height} with {} samples",
                data.len()
            )));
        }
        let pw = width.div_ceil(8) * 8;
        let ph = height.div_ceil(8) * 8;
        let mut samples = vec![0u8; pw * ph];
        for y in 0..ph {
            let sy = y.min(height - 1);
            for x in 0..pw {
                samples[y * pw + x] = data[sy * width + x.min(width - 1)];
            }
        }
        Ok(PixelPlane { width: pw, height: ph, samples })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn blocks_x(&self) -> usize {
        self.width / 8
    }

    pub fn blocks_y(&self) -> usize {
        self.height / 8
    }

    pub fn block(&self, bx: usize, by: usize) -> [u8; 64] {
        let mut out = [0u8; 64];
        for r in 0..8 {
            let start = (by * 8 + r) * self.width + bx * 8;
            out[r * 8..r * 8 + 8].copy_from_slice(&self.samples[start..start + 8]);
        }
        out
    }

    pub fn set_block(&mut self, bx: usize, by: usize, px: &[u8; 64]) {
        for r in 0..8 {
            let start = (by * 8 + r) * self.width + bx * 8;
            self.samples[start..start + 8].copy_from_slice(&px[r * 8..r * 8 + 8]);
        }
    }

    /// Single JPEG compression with the reference DCT.
    pub fn compress(&self, table: &QuantTable) -> CoefficientPlane {
        let (bx, by) = (self.blocks_x(), self.blocks_y());
        let mut blocks = Vec::with_capacity(bx * by);
        for y in 0..by {
            for x in 0..bx {
                blocks.push(quantize(&forward_block(&self.block(x, y)), table));
            }
        }
        CoefficientPlane {
            width: self.width,
            height: self.height,
            blocks_x: bx,
            blocks_y: by,
            blocks,
            table: *table,
            quality: None,
        }
    }
}

/// Quantized DCT coefficients of a grayscale JPEG: the embedding domain.
///
/// `blocks[by * blocks_x + bx][mode]`, modes in natural order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientPlane {
    /// Frame dimensions written to the JPEG header (may be smaller than the
    /// block grid).
    pub width: usize,
    pub height: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub blocks: Vec<[i32; 64]>,
    pub table: QuantTable,
    pub quality: Option<u8>,
}

impl CoefficientPlane {
    pub fn zeros(width: usize, height: usize, table: QuantTable) -> Self {
        let blocks_x = width.div_ceil(8);
        let blocks_y = height.div_ceil(8);
        CoefficientPlane {
            width,
            height,
            blocks_x,
            blocks_y,
            blocks: vec![[0; 64]; blocks_x * blocks_y],
            table,
            quality: None,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_coefficients(&self) -> usize {
        self.blocks.len() * 64
    }

    #[inline]
    pub fn get(&self, block: usize, mode: usize) -> i32 {
        self.blocks[block][mode]
    }

    /// Count of nonzero AC coefficients (the bpnzAC denominator).
    pub fn nonzero_ac(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b[1..].iter().filter(|&&v| v != 0).count())
            .sum()
    }

    pub fn decompress(&self) -> PixelPlane {
        let mut px = PixelPlane {
            width: self.blocks_x * 8,
            height: self.blocks_y * 8,
            samples: vec![0; self.blocks_x * self.blocks_y * 64],
        };
        for (i, b) in self.blocks.iter().enumerate() {
            let pixels = inverse_block(&dequantize(b, &self.table));
            px.set_block(i % self.blocks_x, i / self.blocks_x, &pixels);
        }
        px
    }

    pub fn apply(&mut self, mods: &[Modification]) -> Result<()> {
        validate_mods(self, mods)?;
        for m in mods {
            self.blocks[m.block][m.mode as usize] += m.delta as i32;
        }
        Ok(())
    }

    /// Same block grid and table.
    pub fn same_geometry(&self, other: &CoefficientPlane) -> bool {
        self.blocks_x == other.blocks_x
            && self.blocks_y == other.blocks_y
            && self.table == other.table
    }
}

/// A ternary change at one (block, mode) position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modification {
    pub block: usize,
    pub mode: u8,
    pub delta: i8,
}

impl Modification {
    pub fn new(block: usize, mode: u8, delta: i8) -> Self {
        Modification { block, mode, delta }
    }
}

pub(crate) fn validate_mods(plane: &CoefficientPlane, mods: &[Modification]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(mods.len());
    for m in mods {
        if m.block >= plane.num_blocks() || m.mode >= 64 {
            return Err(StegoError::InvalidModification(format!(
                "position ({}, {}) outside plane",
                m.block, m.mode
            )));
        }
        if !(-1..=1).contains(&m.delta) {
            return Err(StegoError::InvalidModification(format!(
                "delta {} not in {{-1, 0, 1}}",
                m.delta
            )));
        }
        if !seen.insert((m.block, m.mode)) {
            return Err(StegoError::InvalidModification(format!(
                "duplicate position ({}, {})",
                m.block, m.mode
            )));
        }
    }
    Ok(())
}
