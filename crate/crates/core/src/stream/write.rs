use super::huffman::{
    HuffmanTable, STD_AC_LUMA_BITS, STD_AC_LUMA_VALS, STD_DC_LUMA_BITS, STD_DC_LUMA_VALS,
};
use super::{marker, Segment};
use crate::error::{Result, StegoError};
use crate::jpeg::{CoefficientPlane, ZIGZAG};

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        BitWriter { out, acc: 0, nbits: 0 }
    }

    #[inline]
    fn put(&mut self, code: u32, len: u32) {
        debug_assert!(len <= 16);
        self.acc = (self.acc << len) | (code & ((1 << len) - 1));
        self.nbits += len;
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.nbits -= 8;
        }
        self.acc &= (1 << self.nbits) - 1;
    }

    /// Pad the last byte with one bits.
    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.put((1 << pad) - 1, pad);
        }
        self.out
    }
}

/// Magnitude category and the low bits that encode `v`.
#[inline]
fn category(v: i32) -> (u32, u32) {
    let mag = v.unsigned_abs();
    let size = 32 - mag.leading_zeros();
    let bits = if v < 0 { (v - 1) as u32 & ((1 << size) - 1) } else { v as u32 };
    (size, bits)
}

fn segment(out: &mut Vec<u8>, m: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, m]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn check_range(plane: &CoefficientPlane) -> Result<()> {
    if plane.width == 0 || plane.height == 0 || plane.width > 65535 || plane.height > 65535 {
        return Err(StegoError::CoefficientOverflow(format!(
            "frame {}x{} not representable",
            plane.width, plane.height
        )));
    }
    if plane.blocks_x != plane.width.div_ceil(8) || plane.blocks_y != plane.height.div_ceil(8) {
        return Err(StegoError::InvalidLength(format!(
            "block grid {}x{} does not match frame {}x{}",
            plane.blocks_x, plane.blocks_y, plane.width, plane.height
        )));
    }
    let mut pred = 0i32;
    for (i, b) in plane.blocks.iter().enumerate() {
        let diff = b[0] - pred;
        pred = b[0];
        if diff.abs() >= 2048 {
            return Err(StegoError::CoefficientOverflow(format!(
                "DC difference {diff} in block {i}"
            )));
        }
        if let Some(n) = (1..64).find(|&n| b[n].abs() >= 1024) {
            return Err(StegoError::CoefficientOverflow(format!(
                "AC value {} at block {i}, mode {n}",
                b[n]
            )));
        }
    }
    Ok(())
}

/// Baseline file with the standard Huffman tables and no extra segments.
pub fn serialize(plane: &CoefficientPlane) -> Result<Vec<u8>> {
    serialize_with_segments(plane, &[])
}

/// Like [`serialize`], re-emitting `segments` verbatim right after SOI.
pub fn serialize_with_segments(plane: &CoefficientPlane, segments: &[Segment]) -> Result<Vec<u8>> {
    check_range(plane)?;
    let mut out = Vec::with_capacity(plane.num_blocks() * 16 + 1024);
    out.extend_from_slice(&[0xFF, marker::SOI]);
    for s in segments {
        segment(&mut out, s.marker, &s.data);
    }

    let mut dqt = vec![0u8];
    dqt.extend(plane.table.to_zigzag().iter().map(|&v| v as u8));
    segment(&mut out, marker::DQT, &dqt);

    let (w, h) = (plane.width as u16, plane.height as u16);
    let mut sof = vec![8u8];
    sof.extend_from_slice(&h.to_be_bytes());
    sof.extend_from_slice(&w.to_be_bytes());
    sof.extend_from_slice(&[1, 1, 0x11, 0]);
    segment(&mut out, marker::SOF0, &sof);

    let mut dht = vec![0x00];
    dht.extend_from_slice(&STD_DC_LUMA_BITS);
    dht.extend_from_slice(&STD_DC_LUMA_VALS);
    dht.push(0x10);
    dht.extend_from_slice(&STD_AC_LUMA_BITS);
    dht.extend_from_slice(&STD_AC_LUMA_VALS);
    segment(&mut out, marker::DHT, &dht);

    segment(&mut out, marker::SOS, &[1, 1, 0x00, 0, 63, 0]);

    let dc = HuffmanTable::std_dc_luma();
    let ac = HuffmanTable::std_ac_luma();
    let mut bw = BitWriter::new(out);
    let mut pred = 0i32;
    for b in &plane.blocks {
        let (size, bits) = category(b[0] - pred);
        pred = b[0];
        let (code, len) = dc.code(size as u8).expect("standard DC table is complete");
        bw.put(code as u32, len as u32);
        if size > 0 {
            bw.put(bits, size);
        }
        let mut run = 0u32;
        for &n in &ZIGZAG[1..] {
            let v = b[n];
            if v == 0 {
                run += 1;
                continue;
            }
            while run > 15 {
                let (code, len) = ac.code(0xF0).expect("ZRL");
                bw.put(code as u32, len as u32);
                run -= 16;
            }
            let (size, bits) = category(v);
            let (code, len) = ac.code(((run << 4) | size) as u8).expect("standard AC table");
            bw.put(code as u32, len as u32);
            bw.put(bits, size);
            run = 0;
        }
        if run > 0 {
            let (code, len) = ac.code(0x00).expect("EOB");
            bw.put(code as u32, len as u32);
        }
    }
    let mut out = bw.finish();
    out.extend_from_slice(&[0xFF, marker::EOI]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::QuantTable;

    #[test]
    fn categories() {
        assert_eq!(category(0), (0, 0));
        assert_eq!(category(1), (1, 1));
        assert_eq!(category(-1), (1, 0));
        assert_eq!(category(-3), (2, 0));
        assert_eq!(category(5), (3, 5));
        assert_eq!(category(-1023), (10, 0));
    }

    #[test]
    fn stuffing_after_ff() {
        let mut bw = BitWriter::new(Vec::new());
        bw.put(0xFF, 8);
        bw.put(0x1, 1);
        assert_eq!(bw.finish(), vec![0xFF, 0x00, 0xFF, 0x00]);
    }

    #[test]
    fn overflow_is_reported() {
        let mut p = CoefficientPlane::zeros(8, 8, QuantTable::annex_k());
        p.blocks[0][5] = 1024;
        assert!(matches!(serialize(&p), Err(StegoError::CoefficientOverflow(_))));
        p.blocks[0][5] = 0;
        p.blocks[0][0] = -2048;
        assert!(matches!(serialize(&p), Err(StegoError::CoefficientOverflow(_))));
    }
}
