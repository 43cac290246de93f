//! The upload channel: decompress, optionally filter, recompress.

use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::filter::FilterSpec;
use crate::jpeg::{CoefficientPlane, Recompressor};
use crate::stream;

/// Directory for the external coder's temporary files.
pub const TMPDIR_ENV: &str = "JSTEGO_TMPDIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Coder {
    /// The built-in coder with the image's own quantization table.
    Internal,
    /// A shell command with `{in}` and `{out}` placeholders for JPEG paths.
    External { command: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub coder: Coder,
    /// Applied between decompression and recompression. Alice models the
    /// channel with it; an external command is expected to do the same.
    pub filter: Option<FilterSpec>,
}

impl ChannelSpec {
    pub fn internal(filter: Option<FilterSpec>) -> Self {
        ChannelSpec { coder: Coder::Internal, filter }
    }

    pub fn external(command: impl Into<String>, filter: Option<FilterSpec>) -> Self {
        ChannelSpec { coder: Coder::External { command: command.into() }, filter }
    }

    pub fn is_internal(&self) -> bool {
        self.coder == Coder::Internal
    }

    pub fn recompressor(&self) -> Recompressor {
        Recompressor::new(self.filter.clone())
    }
}

/// Pass `stego` through the channel. Internal calls are counted on `rc`,
/// which must model the same filter.
pub fn simulate_channel(stego: &CoefficientPlane, channel: &ChannelSpec, rc: &Recompressor) -> Result<CoefficientPlane> {
    match &channel.coder {
        Coder::Internal => rc.recompress(stego, &[]),
        Coder::External { command } => run_external(stego, command),
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

fn run_external(stego: &CoefficientPlane, command: &str) -> Result<CoefficientPlane> {
    let mut builder = tempfile::Builder::new();
    builder.prefix("jstego-");
    let dir = match std::env::var_os(TMPDIR_ENV) {
        Some(d) => builder.tempdir_in(d),
        None => builder.tempdir(),
    }
    .map_err(|e| StegoError::ExternalCoderFailure(format!("temp dir: {e}")))?;
    let input = dir.path().join("in.jpg");
    let output = dir.path().join("out.jpg");
    std::fs::write(&input, stream::serialize(stego)?)?;

    let cmd = command.replace("{in}", &shell_quote(&input)).replace("{out}", &shell_quote(&output));
    let status = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .output()
        .map_err(|e| StegoError::ExternalCoderFailure(format!("cannot run '{command}': {e}")))?;
    if !status.status.success() {
        return Err(StegoError::ExternalCoderFailure(format!(
            "'{command}' exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr).trim()
        )));
    }
    let bytes = std::fs::read(&output)
        .map_err(|e| StegoError::ExternalCoderFailure(format!("no output from '{command}': {e}")))?;
    let (_, plane) = stream::parse(&bytes)
        .map_err(|e| StegoError::ExternalCoderFailure(format!("unreadable output: {e}")))?;
    if !plane.same_geometry(stego) {
        return Err(StegoError::ExternalCoderFailure("output dimensions differ from input".into()));
    }
    if plane.table != stego.table {
        return Err(StegoError::ChannelMismatch("external coder changed the quantization table".into()));
    }
    Ok(plane)
}
