//! Report records written by the CLI. Field names are part of the
//! published schemas in `schema/`; bump `SCHEMA_VERSION` on any change.

use serde::{Deserialize, Serialize};

use jstego_core::pipeline::EmbedReport;

pub const SCHEMA_VERSION: u32 = 1;

pub const ROBUST_MAP_HEADER: [&str; 7] =
    ["stage", "latticeIndex", "nBoth", "nPlusOnly", "nMinusOnly", "nNonRobust", "robustFraction"];

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub seconds: f64,
}

/// `embed` output.
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(rename_all = "camelCase")]
pub struct EmbedRun {
    pub schema_version: u32,
    pub input: String,
    pub output: String,
    pub blocks: usize,
    pub nonzero_ac: usize,
    pub mode: String,
    pub cost_model: String,
    pub spread: String,
    pub filter: Option<String>,
    pub channel: String,
    /// Robust capacity in bits per coefficient.
    pub capacity_bpc: Option<f64>,
    pub payload_bpnzac: f64,
    /// Extraction after the channel matched the message (always false for
    /// simulated embeddings).
    pub success: bool,
    pub embedding: EmbedReport,
    pub timing: Timing,
}

/// One image of a `success-rate` grid cell.
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(rename_all = "camelCase")]
pub struct ImageResult {
    pub image: String,
    pub quality: u8,
    pub strategy: String,
    pub rate: f64,
    pub message_bits: usize,
    pub success: bool,
    /// The embedding was refused for lack of robust capacity.
    pub over_capacity: bool,
    /// Error text when the embedding failed.
    pub error: Option<String>,
    pub flips: usize,
    pub compressor_calls: usize,
    pub capacity_bits: Option<f64>,
    pub capacity_bpc: Option<f64>,
    pub robust_fractions: Vec<f64>,
    pub timing: Timing,
}

/// `success-rate --report` output.
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub images: usize,
    pub results: Vec<ImageResult>,
}

/// One row of the `success-rate` summary CSV.
#[derive(Serialize, Debug, Clone, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct CellSummary {
    pub quality: u8,
    pub strategy: String,
    pub rate: f64,
    pub attempts: usize,
    pub successes: usize,
    pub over_capacity: usize,
    pub other_failures: usize,
    pub success_rate: f64,
}
