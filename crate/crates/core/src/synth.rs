//! Deterministic synthetic grayscale covers.
//!
//! Every image is a pure function of its family and seed, so test corpora
//! can be rebuilt anywhere without shipping files.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jpeg::PixelPlane;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Summed octaves of value noise, loosely photo-like.
    Fractal,
    /// Crossed sinusoids plus sensor-like noise.
    Waves,
    /// Flat regions with hard edges.
    Shapes,
    /// Linear ramps with mild noise.
    Gradient,
    /// High-contrast content pushed into 0 and 255.
    Saturated,
}

pub const FAMILIES: [Family; 5] = [Family::Fractal, Family::Waves, Family::Shapes, Family::Gradient, Family::Saturated];

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Fractal => "fractal",
            Family::Waves => "waves",
            Family::Shapes => "shapes",
            Family::Gradient => "gradient",
            Family::Saturated => "saturated",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct SynthImage {
    pub name: String,
    pub family: Family,
    pub pixels: PixelPlane,
}

fn value_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, cell: usize) -> Vec<f64> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (gx, gy) = (x / cell, y / cell);
            let tx = smooth((x % cell) as f64 / cell as f64);
            let ty = smooth((y % cell) as f64 / cell as f64);
            let g = |i: usize, j: usize| grid[(gy + j) * gw + gx + i];
            let top = g(0, 0) * (1.0 - tx) + g(1, 0) * tx;
            let bottom = g(0, 1) * (1.0 - tx) + g(1, 1) * tx;
            out[y * w + x] = top * (1.0 - ty) + bottom * ty;
        }
    }
    out
}

fn to_plane(w: usize, h: usize, v: impl Fn(usize, usize) -> f64) -> PixelPlane {
    let samples = (0..w * h).map(|i| v(i % w, i / w).round().clamp(0.0, 255.0) as u8).collect();
    PixelPlane::new(w, h, samples).expect("synthetic sizes are multiples of 8")
}

/// One image of `family`; `size` must be a multiple of 8.
pub fn generate(family: Family, seed: u64, size: usize) -> SynthImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ family as u64);
    let (w, h) = (size, size);
    let pixels = match family {
        Family::Fractal => {
            let octaves: Vec<(Vec<f64>, f64)> = [64usize, 32, 16, 8, 4]
                .iter()
                .zip([1.0, 0.5, 0.25, 0.125, 0.0625])
                .map(|(&cell, amp)| (value_noise(&mut rng, w, h, cell.min(size)), amp))
                .collect();
            let contrast = rng.gen_range(50.0..90.0);
            let mean = rng.gen_range(100.0..150.0);
            to_plane(w, h, |x, y| mean + contrast * octaves.iter().map(|(o, a)| a * o[y * w + x]).sum::<f64>())
        }
        Family::Waves => {
            let (fx, fy) = (rng.gen_range(3.0..20.0), rng.gen_range(3.0..20.0));
            let amp = rng.gen_range(30.0..80.0);
            let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-6.0..6.0)).collect();
            to_plane(w, h, |x, y| {
                128.0 + amp * (x as f64 / fx).sin() * (y as f64 / fy).cos() + noise[y * w + x]
            })
        }
        Family::Shapes => {
            let shapes: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(4..12))
                .map(|_| {
                    (
                        rng.gen_range(0.0..w as f64),
                        rng.gen_range(0.0..h as f64),
                        rng.gen_range(8.0..size as f64 / 3.0),
                        rng.gen_range(20.0..235.0),
                    )
                })
                .collect();
            let background = rng.gen_range(40.0..200.0);
            let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-2.0..2.0)).collect();
            to_plane(w, h, |x, y| {
                let v = shapes
                    .iter()
                    .rev()
                    .find(|(cx, cy, r, _)| (x as f64 - cx).hypot(y as f64 - cy) < *r)
                    .map_or(background, |s| s.3);
                v + noise[y * w + x]
            })
        }
        Family::Gradient => {
            let (a, b) = (rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
            let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-3.0..3.0)).collect();
            to_plane(w, h, |x, y| {
                128.0 + (a * (x as f64 - w as f64 / 2.0) + b * (y as f64 - h as f64 / 2.0)) * 256.0 / size as f64
                    + noise[y * w + x]
            })
        }
        Family::Saturated => {
            let base = value_noise(&mut rng, w, h, 32);
            let detail = value_noise(&mut rng, w, h, 4);
            let gain = rng.gen_range(250.0..400.0);
            let bias = rng.gen_range(-40.0..40.0);
            to_plane(w, h, |x, y| 128.0 + bias + gain * base[y * w + x] + 40.0 * detail[y * w + x])
        }
    };
    SynthImage { name: format!("{family}-{seed:03}"), family, pixels }
}

/// `count` images cycling through the families.
pub fn desk_corpus(count: usize, size: usize) -> Vec<SynthImage> {
    (0..count).map(|i| generate(FAMILIES[i % FAMILIES.len()], i as u64, size)).collect()
}
