//! Shared fixtures for the benchmarks.

use jstego_core::jpeg::quant_table_from_qf;
use jstego_core::synth::{generate, Family};
use jstego_core::CoefficientPlane;

/// A textured cover of `size` x `size` pixels at quality `qf`.
pub fn cover(size: usize, qf: u8) -> CoefficientPlane {
    generate(Family::Fractal, 1, size).pixels.compress(&quant_table_from_qf(qf).expect("valid quality"))
}
