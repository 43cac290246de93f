use std::path::Path;

use jstego_core::jpeg::quant_table_from_qf;
use jstego_core::pgm::read_pgm;
use jstego_core::{stream, CoefficientPlane, FilterSpec, QuantTable, StegoError};

use crate::args::CoverArgs;
use crate::exit::{io_at, CliError, CliResult};

pub const DEFAULT_QUALITY: u8 = 75;

pub fn is_jpeg(bytes: &[u8]) -> bool {
    bytes.starts_with(&[0xFF, 0xD8])
}

pub fn read_jpeg(path: &Path) -> CliResult<CoefficientPlane> {
    let bytes = io_at(std::fs::read(path), path)?;
    Ok(stream::parse(&bytes)?.1)
}

fn table_for(args: &CoverArgs) -> CliResult<Option<QuantTable>> {
    if let Some(path) = &args.table {
        let text = io_at(std::fs::read_to_string(path), path)?;
        return Ok(Some(QuantTable::parse_text(&text)?));
    }
    Ok(args.quality.map(quant_table_from_qf).transpose()?)
}

/// The cover as quantized coefficients.
pub fn load_cover(args: &CoverArgs) -> CliResult<CoefficientPlane> {
    let bytes = io_at(std::fs::read(&args.input), &args.input)?;
    let table = table_for(args)?;
    if is_jpeg(&bytes) {
        let (_, plane) = stream::parse(&bytes)?;
        return Ok(match table {
            Some(t) => plane.decompress().compress(&t),
            None => plane,
        });
    }
    let pixels = read_pgm(&bytes)?;
    let table = match table {
        Some(t) => t,
        None => quant_table_from_qf(DEFAULT_QUALITY)?,
    };
    let mut plane = pixels.compress(&table);
    // Keep the original frame size; padding lives in the block grid.
    let (w, h) = pgm_size(&bytes).unwrap_or((plane.width, plane.height));
    plane.width = w;
    plane.height = h;
    Ok(plane)
}

fn pgm_size(bytes: &[u8]) -> Option<(usize, usize)> {
    let text = String::from_utf8_lossy(&bytes[..bytes.len().min(256)]).into_owned();
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>());
    tokens.next()?;
    Some((tokens.next()?.parse().ok()?, tokens.next()?.parse().ok()?))
}

pub fn parse_filter(name: Option<&str>) -> CliResult<Option<FilterSpec>> {
    name.map(|n| n.parse::<FilterSpec>().map_err(CliError::from)).transpose()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    io_at(std::fs::write(path, bytes), path)
}

pub fn parse_key(hex: &str) -> Result<jstego_core::key::StegoKey, StegoError> {
    jstego_core::key::StegoKey::from_hex(hex)
}
