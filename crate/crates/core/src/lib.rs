//! Errorless robust JPEG steganography.
//!
//! A message is embedded into the quantized DCT coefficients of a grayscale
//! JPEG so that it survives decompression, optional filtering and
//! recompression by a known coder. Coefficients are processed in 64 lattices
//! (576 with filtering); every coefficient of a lattice is checked against
//! the coder before it is allowed to carry a change, and the remaining ones
//! are frozen as wet positions of a syndrome-trellis code.

pub mod costs;
pub mod error;
pub mod filter;
pub mod jpeg;
pub mod key;
pub mod lattice;
pub mod pgm;
pub mod pipeline;
pub mod robustness;
pub mod stc;
pub mod stream;
pub mod synth;

pub use error::{Result, StegoError};
pub use filter::FilterSpec;
pub use jpeg::{CoefficientPlane, Modification, PixelPlane, QuantTable, Recompressor};
