use crate::error::{Result, StegoError};

pub const STD_DC_LUMA_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
pub const STD_DC_LUMA_VALS: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
pub const STD_AC_LUMA_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
pub const STD_AC_LUMA_VALS: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

/// Canonical Huffman table as carried by a DHT segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTable {
    /// Number of codes of each length 1..=16.
    pub bits: [u8; 16],
    pub values: Vec<u8>,
    // decoding helpers, indexed by code length 1..=16
    mincode: [i32; 17],
    maxcode: [i32; 18],
    valptr: [usize; 17],
    // encoding helpers, indexed by symbol
    ehufco: [u16; 256],
    ehufsi: [u8; 256],
}

impl HuffmanTable {
    pub fn new(bits: [u8; 16], values: Vec<u8>) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return Err(StegoError::MalformedJpeg(format!(
                "huffman table declares {total} codes but carries {} values",
                values.len()
            )));
        }
        let mut t = HuffmanTable {
            bits,
            values,
            mincode: [0; 17],
            maxcode: [-1; 18],
            valptr: [0; 17],
            ehufco: [0; 256],
            ehufsi: [0; 256],
        };
        let mut code: u32 = 0;
        let mut k = 0usize;
        for len in 1..=16usize {
            let count = bits[len - 1] as usize;
            t.valptr[len] = k;
            t.mincode[len] = code as i32;
            for _ in 0..count {
                let sym = t.values[k] as usize;
                t.ehufco[sym] = code as u16;
                t.ehufsi[sym] = len as u8;
                code += 1;
                k += 1;
            }
            if count > 0 {
                t.maxcode[len] = code as i32 - 1;
            }
            if code > (1u32 << len) {
                return Err(StegoError::MalformedJpeg("oversubscribed huffman table".into()));
            }
            code <<= 1;
        }
        t.maxcode[17] = i32::MAX;
        Ok(t)
    }

    pub fn std_dc_luma() -> Self {
        Self::new(STD_DC_LUMA_BITS, STD_DC_LUMA_VALS.to_vec()).expect("standard table")
    }

    pub fn std_ac_luma() -> Self {
        Self::new(STD_AC_LUMA_BITS, STD_AC_LUMA_VALS.to_vec()).expect("standard table")
    }

    /// `(code, length)` for `symbol`, or `None` if the table lacks it.
    #[inline]
    pub fn code(&self, symbol: u8) -> Option<(u16, u8)> {
        let len = self.ehufsi[symbol as usize];
        (len > 0).then(|| (self.ehufco[symbol as usize], len))
    }

    /// Decode one symbol, pulling bits from `next_bit`.
    pub fn decode(&self, mut next_bit: impl FnMut() -> Result<u32>) -> Result<u8> {
        let mut code: i32 = 0;
        for len in 1..=16usize {
            code = (code << 1) | next_bit()? as i32;
            if self.maxcode[len] >= 0 && code <= self.maxcode[len] {
                let idx = self.valptr[len] + (code - self.mincode[len]) as usize;
                return Ok(self.values[idx]);
            }
        }
        Err(StegoError::MalformedJpeg("invalid huffman code".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_codes() {
        let dc = HuffmanTable::std_dc_luma();
        // category 0 is the 2-bit code 00, category 1 is 010
        assert_eq!(dc.code(0), Some((0b00, 2)));
        assert_eq!(dc.code(1), Some((0b010, 3)));
        let ac = HuffmanTable::std_ac_luma();
        // EOB is 1010, ZRL is 11111111001
        assert_eq!(ac.code(0x00), Some((0b1010, 4)));
        assert_eq!(ac.code(0xF0), Some((0b111_1111_1001, 11)));
        assert_eq!(ac.code(0xFF), None);
    }

    #[test]
    fn decode_inverts_encode() {
        let ac = HuffmanTable::std_ac_luma();
        for &sym in STD_AC_LUMA_VALS.iter() {
            let (code, len) = ac.code(sym).unwrap();
            let mut i = len;
            let got = ac
                .decode(|| {
                    i -= 1;
                    Ok(((code >> i) & 1) as u32)
                })
                .unwrap();
            assert_eq!(got, sym);
        }
    }

    #[test]
    fn rejects_inconsistent_counts() {
        assert!(HuffmanTable::new(STD_DC_LUMA_BITS, vec![0; 3]).is_err());
    }
}
