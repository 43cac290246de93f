//! Pixel/DCT pipeline and the recompression operator.

pub mod dct;
mod plane;
mod quant;
mod recompress;

pub use dct::{forward_block, inverse_block};
pub use plane::{CoefficientPlane, Modification, PixelPlane};
pub use quant::{
    dequantize, quant_table_from_qf, quantize, QuantTable, ANNEX_K_LUMINANCE, ZIGZAG,
};
pub use recompress::{recompress, recompress_block, Recompressor};
