use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "jstego", version, about = "Robust JPEG steganography that survives recompression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hide a message in a cover image and write the stego JPEG.
    Embed(EmbedArgs),
    /// Recover a message from a (possibly recompressed) stego JPEG.
    Extract(ExtractArgs),
    /// Per-lattice robustness counts as CSV.
    RobustMap(RobustMapArgs),
    /// Embedding success rates over a grid described by a TOML file.
    SuccessRate(SuccessRateArgs),
    /// Compress a PGM into a baseline JPEG.
    Compress(CompressArgs),
    /// Write a synthetic cover as PGM.
    Synth(SynthArgs),
}

/// Where the cover comes from and how it is quantized.
#[derive(Args, Debug, Clone)]
pub struct CoverArgs {
    /// Cover image: baseline grayscale JPEG or binary PGM.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Quality factor for PGM input (default 75). For JPEG input, forces a
    /// decode and re-encode at this quality.
    #[arg(short, long, conflicts_with = "table")]
    pub quality: Option<u8>,
    /// Quantization table file: 64 integers in natural order.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Lattice order: low-high, high-low, random or random:<hex seed>.
    #[arg(short, long, default_value = "low-high")]
    pub strategy: String,
    /// STC constraint height.
    #[arg(long, default_value_t = 10)]
    pub height: u8,
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// Filter applied by the channel: gaussian, sharpen or k:<size>:<weights>.
    #[arg(long)]
    pub filter: Option<String>,
    /// External coder command with {in} and {out} placeholders, used for
    /// the final verification pass.
    #[arg(long, value_name = "COMMAND")]
    pub channel_external: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpreadArg {
    InitialMap,
    Equal,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("payload").required(true).args(["message", "bits", "rate"])))]
pub struct EmbedArgs {
    #[command(flatten)]
    pub cover: CoverArgs,
    /// Stego key as hex.
    #[arg(short, long)]
    pub key: String,
    /// Message file (raw bytes).
    #[arg(short, long)]
    pub message: Option<PathBuf>,
    /// Payload size in bits (with --simulate).
    #[arg(long, requires = "simulate")]
    pub bits: Option<f64>,
    /// Payload size in bits per nonzero AC coefficient (with --simulate).
    #[arg(long, requires = "simulate")]
    pub rate: Option<f64>,
    /// Draw changes from the solved change rates instead of coding.
    #[arg(long, value_name = "SEED")]
    pub simulate: Option<u64>,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Cost model: quantstep or uniform.
    #[arg(long, default_value = "quantstep")]
    pub cost_model: String,
    #[arg(long, value_enum, default_value_t = SpreadArg::InitialMap)]
    pub spread: SpreadArg,
    /// Stego JPEG to write.
    #[arg(short, long)]
    pub output: PathBuf,
    /// JSON report to write.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// Received stego JPEG.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub key: String,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// The channel filtered (macro-lattice schedule).
    #[arg(long)]
    pub filtered: bool,
    /// Where to write the message bytes.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct RobustMapArgs {
    #[command(flatten)]
    pub cover: CoverArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Key, needed only to resolve a keyed random strategy.
    #[arg(short, long)]
    pub key: Option<String>,
    #[arg(long)]
    pub filter: Option<String>,
    /// Also report the robust set of this stego image.
    #[arg(long)]
    pub post: Option<PathBuf>,
    /// CSV destination (stdout if absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SuccessRateArgs {
    /// Grid description (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Summary CSV destination (stdout if absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Per-image JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[command(flatten)]
    pub cover: CoverArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FamilyArg {
    Fractal,
    Waves,
    Shapes,
    Gradient,
    Saturated,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Fractal)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Side length in pixels (multiple of 8).
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}
