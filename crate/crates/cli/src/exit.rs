use std::fmt;

use jstego_core::StegoError;

/// Process exit codes. Usage errors exit with 2 (from clap).
pub mod code {
    pub const IO: u8 = 3;
    pub const INVALID_INPUT: u8 = 4;
    pub const OVER_CAPACITY: u8 = 5;
    pub const INFEASIBLE: u8 = 6;
    pub const CHANNEL: u8 = 7;
    pub const EXTERNAL_CODER: u8 = 8;
    pub const EXTRACTION: u8 = 9;
    pub const CONFIG: u8 = 10;
}

#[derive(Debug)]
pub enum CliError {
    Stego(StegoError),
    Io(String),
    Config(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        use StegoError as E;
        match self {
            CliError::Io(_) => code::IO,
            CliError::Config(_) => code::CONFIG,
            CliError::Stego(e) => match e {
                E::Io(_) => code::IO,
                E::InvalidQuality(_)
                | E::InvalidQuantTable(_)
                | E::UnsupportedJpeg(_)
                | E::InvalidImage(_)
                | E::MalformedJpeg(_)
                | E::InvalidFilter(_)
                | E::InvalidStrategy(_)
                | E::InvalidKey(_)
                | E::UnknownCostModel(_)
                | E::CoefficientOverflow(_)
                | E::ScheduleMismatch(_) => code::INVALID_INPUT,
                E::PayloadExceedsCapacity { .. } => code::OVER_CAPACITY,
                E::EmbeddingInfeasible(_) | E::SolverNoConverge(_) | E::InvalidRates(_) | E::InvalidModification(_) => {
                    code::INFEASIBLE
                }
                E::ChannelMismatch(_) => code::CHANNEL,
                E::ExternalCoderFailure(_) => code::EXTERNAL_CODER,
                E::InvalidLength(_) => code::EXTRACTION,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Stego(StegoError::PayloadExceedsCapacity { requested, capacity }) => write!(
                f,
                "payload of {requested:.0} bits exceeds the robust capacity of {capacity:.0} bits; use a shorter message or a different image"
            ),
            CliError::Stego(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "config: {e}"),
        }
    }
}

impl From<StegoError> for CliError {
    fn from(e: StegoError) -> Self {
        CliError::Stego(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attach the path to an I/O error.
pub fn io_at<T>(r: std::io::Result<T>, path: &std::path::Path) -> CliResult<T> {
    r.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
