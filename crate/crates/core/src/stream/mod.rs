//! Baseline sequential grayscale JPEG reader and writer.
//!
//! The codec only moves quantized coefficients in and out of the file; it
//! never produces pixels.

mod huffman;
mod read;
mod write;

pub use huffman::HuffmanTable;
pub use read::parse;
pub use write::{serialize, serialize_with_segments};

use crate::jpeg::QuantTable;

/// An APPn / COM / other non-structural segment kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub marker: u8,
    /// Payload without the two length bytes.
    pub data: Vec<u8>,
}

/// Everything a parsed file carries besides the coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct JpegFile {
    pub width: u16,
    pub height: u16,
    pub component_id: u8,
    /// Tables by DQT id.
    pub quant_tables: [Option<QuantTable>; 4],
    /// Table id used by the single component.
    pub quant_table_id: u8,
    pub dc_tables: [Option<HuffmanTable>; 4],
    pub ac_tables: [Option<HuffmanTable>; 4],
    pub restart_interval: u16,
    /// Segments that are not needed to decode, in file order.
    pub segments: Vec<Segment>,
}

pub(crate) mod marker {
    pub const SOI: u8 = 0xD8;
    pub const EOI: u8 = 0xD9;
    pub const SOF0: u8 = 0xC0;
    pub const SOF1: u8 = 0xC1;
    pub const DHT: u8 = 0xC4;
    pub const DQT: u8 = 0xDB;
    pub const DRI: u8 = 0xDD;
    pub const SOS: u8 = 0xDA;
    pub const RST0: u8 = 0xD0;
    pub const DNL: u8 = 0xDC;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::{quant_table_from_qf, CoefficientPlane, PixelPlane};
    use proptest::prelude::*;

    fn plane_strategy() -> impl Strategy<Value = CoefficientPlane> {
        (1usize..40, 1usize..40, 1u8..=100).prop_flat_map(|(w, h, qf)| {
            let n = w.div_ceil(8) * h.div_ceil(8);
            (
                Just((w, h, qf)),
                proptest::collection::vec(
                    (
                        -1000i32..1000,
                        proptest::collection::vec(
                            prop_oneof![6 => Just(0i32), 3 => -8i32..8, 1 => -1023i32..=1023],
                            63,
                        ),
                    ),
                    n,
                ),
            )
                .prop_map(|((w, h, qf), blocks)| {
                    let mut p = CoefficientPlane::zeros(w, h, quant_table_from_qf(qf).unwrap());
                    for (b, (dc, ac)) in p.blocks.iter_mut().zip(blocks) {
                        b[0] = dc;
                        b[1..].copy_from_slice(&ac);
                    }
                    p
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn parse_inverts_serialize(p in plane_strategy()) {
            let bytes = serialize(&p).unwrap();
            let (file, q) = parse(&bytes).unwrap();
            prop_assert_eq!(file.width as usize, p.width);
            prop_assert_eq!(&q.blocks, &p.blocks);
            prop_assert_eq!(q.table, p.table);
            prop_assert_eq!(serialize(&q).unwrap(), bytes);
        }
    }

    #[test]
    fn minimal_gray_image() {
        let px = PixelPlane::new(8, 8, vec![128; 64]).unwrap();
        let c = px.compress(&quant_table_from_qf(50).unwrap());
        let bytes = serialize(&c).unwrap();
        let (_, back) = parse(&bytes).unwrap();
        assert_eq!(back.num_blocks(), 1);
        assert!(back.blocks[0].iter().all(|&v| v == 0));
    }

    #[test]
    fn eob_only_block_is_dc_symbol_plus_eob() {
        let c = CoefficientPlane::zeros(8, 8, quant_table_from_qf(50).unwrap());
        let bytes = serialize(&c).unwrap();
        // entropy data sits between the SOS header and EOI: DC category 0
        // (00) then EOB (1010), padded with ones -> 0b0010_1011
        let eoi = bytes.len() - 2;
        assert_eq!(&bytes[eoi..], &[0xFF, 0xD9]);
        assert_eq!(bytes[eoi - 1], 0b0010_1011);
    }

    #[test]
    fn segments_are_preserved() {
        let c = CoefficientPlane::zeros(16, 8, quant_table_from_qf(80).unwrap());
        let segs = vec![
            Segment { marker: 0xE0, data: b"JFIF\0\x01\x01\0\0\x01\0\x01\0\0".to_vec() },
            Segment { marker: 0xFE, data: b"hello".to_vec() },
        ];
        let bytes = serialize_with_segments(&c, &segs).unwrap();
        let (file, _) = parse(&bytes).unwrap();
        assert_eq!(file.segments, segs);
        let again = serialize_with_segments(&c, &file.segments).unwrap();
        assert_eq!(again, bytes);
    }
}
