//! `success-rate`: embed every cover at every grid point and count how many
//! embeddings survive the channel.
//!
//! Config format (TOML):
//!
//! ```toml
//! key = "0011223344556677"
//! qualities = [75, 95]
//! strategies = ["low-high", "random"]
//! rates = [0.1, 0.3]          # bits per nonzero AC coefficient
//! filter = "gaussian"         # optional
//! cost_model = "quantstep"    # optional
//! spread = "initial-map"      # or "equal"; optional
//! height = 10                 # optional
//! threads = 0                 # worker threads, 0 = all cores
//!
//! [corpus]
//! dir = "covers"              # JPEG or PGM files, relative to this file
//! # or: synthetic = 20 and size = 256
//! ```

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use jstego_core::key::{KeyedStream, StegoKey};
use jstego_core::lattice::ScanStrategy;
use jstego_core::pgm::read_pgm;
use jstego_core::pipeline::{embed, extract, simulate_channel, ChannelSpec, EmbedOptions, ExtractOptions, Spread};
use jstego_core::synth::desk_corpus;
use jstego_core::{jpeg::quant_table_from_qf, stream, PixelPlane, StegoError};

use crate::args::SuccessRateArgs;
use crate::exit::{io_at, CliError, CliResult};
use crate::input::{is_jpeg, parse_filter, parse_key, write_file};
use crate::report::{CellSummary, ExperimentReport, ImageResult, Timing, SCHEMA_VERSION};

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub key: String,
    pub qualities: Vec<u8>,
    pub strategies: Vec<String>,
    pub rates: Vec<f64>,
    pub filter: Option<String>,
    #[serde(default = "default_cost_model")]
    pub cost_model: String,
    #[serde(default = "default_spread")]
    pub spread: Spread,
    #[serde(default = "default_height")]
    pub height: u8,
    #[serde(default)]
    pub threads: usize,
    pub corpus: CorpusConfig,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub dir: Option<PathBuf>,
    pub synthetic: Option<usize>,
    #[serde(default = "default_size")]
    pub size: usize,
}

fn default_cost_model() -> String {
    "quantstep".into()
}
fn default_spread() -> Spread {
    Spread::InitialMap
}
fn default_height() -> u8 {
    10
}
fn default_size() -> usize {
    256
}

struct Cover {
    name: String,
    pixels: PixelPlane,
}

fn load_corpus(cfg: &CorpusConfig, base: &Path) -> CliResult<Vec<Cover>> {
    match (&cfg.dir, cfg.synthetic) {
        (Some(dir), None) => {
            let dir = base.join(dir);
            let mut paths: Vec<PathBuf> = io_at(std::fs::read_dir(&dir), &dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
                        Some("jpg" | "jpeg" | "pgm")
                    )
                })
                .collect();
            paths.sort();
            paths
                .iter()
                .map(|p| {
                    let bytes = io_at(std::fs::read(p), p)?;
                    let pixels = if is_jpeg(&bytes) { stream::parse(&bytes)?.1.decompress() } else { read_pgm(&bytes)? };
                    let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                    Ok(Cover { name, pixels })
                })
                .collect()
        }
        (None, Some(n)) => {
            if cfg.size == 0 || !cfg.size.is_multiple_of(8) {
                return Err(CliError::Config(format!("size {} is not a positive multiple of 8", cfg.size)));
            }
            Ok(desk_corpus(n, cfg.size).into_iter().map(|s| Cover { name: s.name, pixels: s.pixels }).collect())
        }
        _ => Err(CliError::Config("corpus needs exactly one of 'dir' or 'synthetic'".into())),
    }
}

pub fn load_config(path: &Path) -> CliResult<GridConfig> {
    let text = io_at(std::fs::read_to_string(path), path)?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn message(image: usize, qf: u8, rate_index: usize, bytes: usize) -> Vec<u8> {
    let mut s = KeyedStream::new("jstego/grid-message", image as u64, (qf as u64) << 16 | rate_index as u64);
    (0..bytes).map(|_| s.next_u64() as u8).collect()
}

struct Job {
    image: usize,
    qf: u8,
    strategy: usize,
    rate_index: usize,
}

fn run_job(
    job: &Job,
    cover: &Cover,
    cfg: &GridConfig,
    strategies: &[ScanStrategy],
    key: &StegoKey,
    channel: &ChannelSpec,
) -> CliResult<ImageResult> {
    let start = Instant::now();
    let plane = cover.pixels.compress(&quant_table_from_qf(job.qf)?);
    let rate = cfg.rates[job.rate_index];
    let msg = message(job.image, job.qf, job.rate_index, (rate * plane.nonzero_ac() as f64 / 8.0).floor() as usize);
    let opts = EmbedOptions {
        strategy: strategies[job.strategy],
        channel: channel.clone(),
        cost_model: cfg.cost_model.clone(),
        height: cfg.height,
        spread: cfg.spread,
        ..EmbedOptions::default()
    };
    let mut r = ImageResult {
        image: cover.name.clone(),
        quality: job.qf,
        strategy: cfg.strategies[job.strategy].clone(),
        rate,
        message_bits: msg.len() * 8,
        success: false,
        over_capacity: false,
        error: None,
        flips: 0,
        compressor_calls: 0,
        capacity_bits: None,
        capacity_bpc: None,
        robust_fractions: vec![],
        timing: Timing { seconds: 0.0 },
    };
    match embed(&plane, &msg, key, &opts) {
        Ok(e) => {
            let received = simulate_channel(&e.stego, &opts.channel, &opts.channel.recompressor())?;
            r.success = e.report.verified && extract(&received, key, &ExtractOptions::from(&opts)).ok() == Some(msg);
            r.flips = e.report.flips;
            r.compressor_calls = e.report.compressor_calls;
            r.capacity_bits = e.report.capacity_bits;
            r.capacity_bpc = e.report.capacity_bits.map(|c| c / plane.num_coefficients() as f64);
            r.robust_fractions = e.report.initial_counts.iter().map(|c| c.robust_fraction()).collect();
        }
        Err(e @ (StegoError::Io(_) | StegoError::ExternalCoderFailure(_))) => return Err(e.into()),
        Err(e) => {
            r.over_capacity = matches!(e, StegoError::PayloadExceedsCapacity { .. });
            r.error = Some(e.to_string());
        }
    }
    r.timing.seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

pub fn summarize(cfg: &GridConfig, results: &[ImageResult]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for &qf in &cfg.qualities {
        for s in &cfg.strategies {
            for &rate in &cfg.rates {
                let cell: Vec<&ImageResult> = results
                    .iter()
                    .filter(|r| r.quality == qf && r.rate == rate && r.strategy == *s)
                    .collect();
                let successes = cell.iter().filter(|r| r.success).count();
                let over = cell.iter().filter(|r| r.over_capacity).count();
                out.push(CellSummary {
                    quality: qf,
                    strategy: s.clone(),
                    rate,
                    attempts: cell.len(),
                    successes,
                    over_capacity: over,
                    other_failures: cell.len() - successes - over,
                    success_rate: if cell.is_empty() { 0.0 } else { successes as f64 / cell.len() as f64 },
                });
            }
        }
    }
    out
}

pub fn cmd_success_rate(a: SuccessRateArgs) -> CliResult<()> {
    let cfg = load_config(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let covers = load_corpus(&cfg.corpus, base)?;
    let key = parse_key(&cfg.key)?;
    let channel = ChannelSpec::internal(parse_filter(cfg.filter.as_deref())?);
    let strategies = cfg
        .strategies
        .iter()
        .map(|s| s.parse::<ScanStrategy>())
        .collect::<Result<Vec<_>, _>>()?;
    for &qf in &cfg.qualities {
        quant_table_from_qf(qf)?;
    }

    let mut jobs = Vec::new();
    for image in 0..covers.len() {
        for &qf in &cfg.qualities {
            for strategy in 0..strategies.len() {
                for rate_index in 0..cfg.rates.len() {
                    jobs.push(Job { image, qf, strategy, rate_index });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<ImageResult> = pool.install(|| {
        jobs.par_iter().map(|j| run_job(j, &covers[j.image], &cfg, &strategies, &key, &channel)).collect::<CliResult<_>>()
    })?;

    let summary = summarize(&cfg, &results);
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &summary {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    match &a.output {
        Some(p) => write_file(p, &csv_bytes)?,
        None => print!("{}", String::from_utf8_lossy(&csv_bytes)),
    }
    if let Some(p) = &a.report {
        let report = ExperimentReport { schema_version: SCHEMA_VERSION, images: covers.len(), results };
        write_file(p, serde_json::to_string_pretty(&report).expect("report serializes").as_bytes())?;
    }
    Ok(())
}
