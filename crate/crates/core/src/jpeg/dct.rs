//! Orthonormal 8x8 DCT-II in double precision.
//!
//! Blocks are row-major: index `r * 8 + c`, where `r` is the vertical
//! frequency (or pixel row) and `c` the horizontal one.

use std::sync::OnceLock;

struct Basis {
    /// `m[u][x] = s(u) * cos((2x + 1) u pi / 16)`
    m: [[f64; 8]; 8],
}

fn basis() -> &'static Basis {
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0f64; 8]; 8];
        for (u, row) in m.iter_mut().enumerate() {
            let s = if u == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = s * (((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        Basis { m }
    })
}

/// 2-D DCT of level-shifted samples (`samples` already centred on 0).
#[inline]
pub fn fdct(samples: &[f64; 64]) -> [f64; 64] {
    let m = &basis().m;
    let mut tmp = [0f64; 64];
    // tmp[u][x] = sum_y m[u][y] * s[y][x]
    for u in 0..8 {
        let mu = &m[u];
        let t = &mut tmp[u * 8..u * 8 + 8];
        for y in 0..8 {
            let w = mu[y];
            let s = &samples[y * 8..y * 8 + 8];
            for x in 0..8 {
                t[x] += w * s[x];
            }
        }
    }
    let mut out = [0f64; 64];
    // out[u][v] = sum_x tmp[u][x] * m[v][x]
    for u in 0..8 {
        let t = &tmp[u * 8..u * 8 + 8];
        for v in 0..8 {
            let mv = &m[v];
            let mut acc = 0.0;
            for x in 0..8 {
                acc += t[x] * mv[x];
            }
            out[u * 8 + v] = acc;
        }
    }
    out
}

/// Exact inverse of [`fdct`]; output is still centred on 0.
#[inline]
pub fn idct(coeffs: &[f64; 64]) -> [f64; 64] {
    let m = &basis().m;
    let mut tmp = [0f64; 64];
    // tmp[y][v] = sum_u m[u][y] * F[u][v]
    for u in 0..8 {
        let f = &coeffs[u * 8..u * 8 + 8];
        if f.iter().all(|&v| v == 0.0) {
            continue;
        }
        for y in 0..8 {
            let w = m[u][y];
            let t = &mut tmp[y * 8..y * 8 + 8];
            for v in 0..8 {
                t[v] += w * f[v];
            }
        }
    }
    let mut out = [0f64; 64];
    // out[y][x] = sum_v tmp[y][v] * m[v][x]
    for y in 0..8 {
        let t = &tmp[y * 8..y * 8 + 8];
        let o = &mut out[y * 8..y * 8 + 8];
        for v in 0..8 {
            let w = t[v];
            let mv = &m[v];
            for x in 0..8 {
                o[x] += w * mv[x];
            }
        }
    }
    out
}

/// Level shift by -128, then forward DCT.
pub fn forward_block(pixels: &[u8; 64]) -> [f64; 64] {
    let mut s = [0f64; 64];
    for (d, &p) in s.iter_mut().zip(pixels.iter()) {
        *d = p as f64 - 128.0;
    }
    fdct(&s)
}

/// Inverse DCT, +128, round half away from zero, clip to `[0, 255]`.
pub fn inverse_block(coeffs: &[f64; 64]) -> [u8; 64] {
    let s = idct(coeffs);
    let mut out = [0u8; 64];
    for (d, &v) in out.iter_mut().zip(s.iter()) {
        *d = to_pixel(v + 128.0);
    }
    out
}

#[inline]
pub(crate) fn to_pixel(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
