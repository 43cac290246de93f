//! Binary PGM (P5, 8-bit) reading and writing.

use crate::error::{Result, StegoError};
use crate::jpeg::PixelPlane;

fn bad(msg: &str) -> StegoError {
    StegoError::InvalidImage(format!("PGM: {msg}"))
}

/// Parse a P5 file. Sizes that are not multiples of 8 are padded by edge
/// replication.
pub fn read_pgm(bytes: &[u8]) -> Result<PixelPlane> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(bad("only binary P5 is supported"));
    }
    let num = |s: String| s.parse::<usize>().map_err(|_| bad("bad number"));
    let w = num(token()?)?;
    let h = num(token()?)?;
    let max = num(token()?)?;
    if max != 255 {
        return Err(bad("only 8-bit maxval 255 is supported"));
    }
    let data = bytes.get(pos + 1..pos + 1 + w * h).ok_or_else(|| bad("truncated pixel data"))?;
    PixelPlane::from_raster(w, h, data)
}

pub fn write_pgm(plane: &PixelPlane) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", plane.width(), plane.height()).into_bytes();
    out.extend_from_slice(plane.samples());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = PixelPlane::new(16, 8, (0..128).map(|i| i as u8).collect()).unwrap();
        assert_eq!(read_pgm(&write_pgm(&p)).unwrap(), p);
    }

    #[test]
    fn comments_and_padding() {
        let mut f = b"P5 # c\n3 2\n255\n".to_vec();
        f.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let p = read_pgm(&f).unwrap();
        assert_eq!((p.width(), p.height()), (8, 8));
        assert_eq!(p.samples()[7], 3);
        assert!(read_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(read_pgm(b"P5\n4 4\n255\n\x00").is_err());
    }
}
