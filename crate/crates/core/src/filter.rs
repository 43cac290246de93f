//! Spatial filters applied by the channel between decompression and
//! recompression.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::jpeg::dct::to_pixel;
use crate::jpeg::PixelPlane;

/// Square odd-sized convolution kernel with edge-replicated borders.
///
/// The window must fit inside one 8x8 block, so only 1, 3, 5 and 7 are
/// accepted as sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub name: String,
    pub size: usize,
    /// Row-major weights, `size * size` of them.
    pub kernel: Vec<f64>,
}

impl FilterSpec {
    pub fn new(name: impl Into<String>, size: usize, kernel: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || size > 7 {
            return Err(StegoError::InvalidFilter(format!(
                "kernel size {size} must be odd and at most 7"
            )));
        }
        if kernel.len() != size * size {
            return Err(StegoError::InvalidFilter(format!(
                "expected {} weights, got {}",
                size * size,
                kernel.len()
            )));
        }
        if kernel.iter().any(|w| !w.is_finite()) {
            return Err(StegoError::InvalidFilter("non-finite weight".into()));
        }
        Ok(FilterSpec { name: name.into(), size, kernel })
    }

    /// (1/16) [1 2 1; 2 4 2; 1 2 1]
    pub fn gaussian3() -> Self {
        let k = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0];
        FilterSpec {
            name: "gaussian".into(),
            size: 3,
            kernel: k.iter().map(|v| v / 16.0).collect(),
        }
    }

    /// [0 -1 0; -1 5 -1; 0 -1 0]
    pub fn sharpen3() -> Self {
        FilterSpec {
            name: "sharpen".into(),
            size: 3,
            kernel: vec![0.0, -1.0, 0.0, -1.0, 5.0, -1.0, 0.0, -1.0, 0.0],
        }
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    /// Convolve, round half away from zero and clip to `[0, 255]`.
    pub fn apply(&self, src: &PixelPlane) -> PixelPlane {
        let (w, h) = (src.width(), src.height());
        let r = self.radius() as isize;
        let s = src.samples();
        let mut out = vec![0u8; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                let mut k = 0;
                for dy in -r..=r {
                    let sy = (y + dy).clamp(0, h as isize - 1) as usize;
                    for dx in -r..=r {
                        let sx = (x + dx).clamp(0, w as isize - 1) as usize;
                        acc += self.kernel[k] * s[sy * w + sx] as f64;
                        k += 1;
                    }
                }
                out[y as usize * w + x as usize] = to_pixel(acc);
            }
        }
        PixelPlane::new(w, h, out).expect("same geometry as source")
    }
}

impl FromStr for FilterSpec {
    type Err = StegoError;

    /// `gaussian`, `sharpen`, or `k:<size>:<w1,w2,...>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian3" | "blur" => Ok(Self::gaussian3()),
            "sharpen" | "sharpen3" => Ok(Self::sharpen3()),
            _ => {
                let rest = s
                    .strip_prefix("k:")
                    .ok_or_else(|| StegoError::InvalidFilter(format!("unknown filter '{s}'")))?;
                let (size, weights) = rest
                    .split_once(':')
                    .ok_or_else(|| StegoError::InvalidFilter(format!("bad kernel spec '{s}'")))?;
                let size: usize = size
                    .parse()
                    .map_err(|_| StegoError::InvalidFilter(format!("bad size in '{s}'")))?;
                let kernel = weights
                    .split(',')
                    .map(|w| {
                        w.trim()
                            .parse::<f64>()
                            .map_err(|_| StegoError::InvalidFilter(format!("bad weight '{w}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FilterSpec::new("custom", size, kernel)
            }
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_preserves_flat() {
        let p = PixelPlane::new(16, 16, vec![77; 256]).unwrap();
        assert_eq!(FilterSpec::gaussian3().apply(&p), p);
        assert_eq!(FilterSpec::sharpen3().apply(&p), p);
    }

    #[test]
    fn sharpen_clips() {
        let mut s = vec![250u8; 64];
        s[27] = 255;
        s[28] = 100;
        let p = PixelPlane::new(8, 8, s).unwrap();
        let f = FilterSpec::sharpen3().apply(&p);
        assert_eq!(f.samples()[27], 255);
        assert_eq!(f.samples()[28], 0);
    }

    #[test]
    fn parse_names_and_custom() {
        assert_eq!("gaussian".parse::<FilterSpec>().unwrap(), FilterSpec::gaussian3());
        let k: FilterSpec = "k:1:1.0".parse().unwrap();
        assert_eq!(k.size, 1);
        assert!("k:4:1,1,1,1".parse::<FilterSpec>().is_err());
        assert!("k:9:1".parse::<FilterSpec>().is_err());
        assert!("median".parse::<FilterSpec>().is_err());
    }

    #[test]
    fn identity_kernel_is_identity() {
        let s: Vec<u8> = (0..256).map(|v| (v * 7 % 256) as u8).collect();
        let p = PixelPlane::new(16, 16, s).unwrap();
        let id = FilterSpec::new("id", 3, vec![0., 0., 0., 0., 1., 0., 0., 0., 0.]).unwrap();
        assert_eq!(id.apply(&p), p);
    }
}
