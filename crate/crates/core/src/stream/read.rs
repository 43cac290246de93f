use super::huffman::HuffmanTable;
use super::{marker, JpegFile, Segment};
use crate::error::{Result, StegoError};
use crate::jpeg::{CoefficientPlane, QuantTable, ZIGZAG};

fn malformed(msg: impl Into<String>) -> StegoError {
    StegoError::MalformedJpeg(msg.into())
}

fn unsupported(msg: impl Into<String>) -> StegoError {
    StegoError::UnsupportedJpeg(msg.into())
}

struct Frame {
    width: u16,
    height: u16,
    component_id: u8,
    quant_id: u8,
}

/// Reads entropy-coded bits, removing stuffed zero bytes. Stops at the
/// first real marker and reports it instead of consuming it.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        BitReader { data, pos, acc: 0, nbits: 0 }
    }

    #[inline]
    fn bit(&mut self) -> Result<u32> {
        if self.nbits == 0 {
            let byte = *self.data.get(self.pos).ok_or_else(|| malformed("truncated scan"))?;
            if byte == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => self.pos += 2,
                    Some(_) => return Err(malformed("scan data ends before all blocks")),
                    None => return Err(malformed("truncated scan")),
                }
            } else {
                self.pos += 1;
            }
            self.acc = byte as u32;
            self.nbits = 8;
        }
        self.nbits -= 1;
        Ok((self.acc >> self.nbits) & 1)
    }

    fn bits(&mut self, n: u32) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    /// Drop the partial byte and expect `RSTn`.
    fn restart(&mut self, expected: u8) -> Result<()> {
        self.nbits = 0;
        match (self.data.get(self.pos), self.data.get(self.pos + 1)) {
            (Some(0xFF), Some(&m)) if m == marker::RST0 + expected => {
                self.pos += 2;
                Ok(())
            }
            _ => Err(malformed(format!("missing RST{expected}"))),
        }
    }
}

#[inline]
fn extend(v: u32, size: u32) -> i32 {
    if size == 0 {
        0
    } else if v < (1 << (size - 1)) {
        v as i32 - (1 << size) + 1
    } else {
        v as i32
    }
}

fn read_u16(d: &[u8], at: usize) -> Result<u16> {
    d.get(at..at + 2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .ok_or_else(|| malformed("truncated segment"))
}

/// Parse a baseline grayscale file into its tables and coefficients.
pub fn parse(bytes: &[u8]) -> Result<(JpegFile, CoefficientPlane)> {
    if bytes.len() < 4 || bytes[0] != 0xFF || bytes[1] != marker::SOI {
        return Err(malformed("missing SOI"));
    }
    let mut file = JpegFile {
        width: 0,
        height: 0,
        component_id: 0,
        quant_tables: [None; 4],
        quant_table_id: 0,
        dc_tables: Default::default(),
        ac_tables: Default::default(),
        restart_interval: 0,
        segments: Vec::new(),
    };
    let mut frame: Option<Frame> = None;
    let mut plane: Option<CoefficientPlane> = None;
    let mut pos = 2;

    loop {
        // find the next marker, skipping fill bytes
        if pos >= bytes.len() {
            return Err(malformed("missing EOI"));
        }
        if bytes[pos] != 0xFF {
            return Err(malformed(format!("expected marker at offset {pos}")));
        }
        while pos < bytes.len() && bytes[pos] == 0xFF {
            pos += 1;
        }
        let m = *bytes.get(pos).ok_or_else(|| malformed("missing EOI"))?;
        pos += 1;

        match m {
            marker::EOI => break,
            marker::SOI => return Err(malformed("nested SOI")),
            0xD0..=0xD7 => return Err(malformed("restart marker outside scan")),
            0x01 => continue,
            _ => {}
        }

        let len = read_u16(bytes, pos)? as usize;
        if len < 2 || pos + len > bytes.len() {
            return Err(malformed(format!("segment 0x{m:02X} overruns file")));
        }
        let body = &bytes[pos + 2..pos + len];
        pos += len;

        match m {
            marker::DQT => read_dqt(body, &mut file)?,
            marker::DHT => read_dht(body, &mut file)?,
            marker::DRI => {
                file.restart_interval = read_u16(body, 0)?;
            }
            marker::SOF0 | marker::SOF1 => {
                if frame.is_some() {
                    return Err(malformed("multiple frames"));
                }
                frame = Some(read_sof(body)?);
            }
            0xC2 => return Err(unsupported("progressive JPEG")),
            0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return Err(unsupported(format!("frame type 0x{m:02X}")))
            }
            marker::DNL => return Err(unsupported("DNL marker")),
            marker::SOS => {
                let f = frame.as_ref().ok_or_else(|| malformed("SOS before SOF"))?;
                if plane.is_some() {
                    return Err(unsupported("multiple scans"));
                }
                let (p, next) = read_scan(bytes, pos, body, f, &file)?;
                plane = Some(p);
                pos = next;
            }
            _ => file.segments.push(Segment { marker: m, data: body.to_vec() }),
        }
    }

    let f = frame.ok_or_else(|| malformed("no frame header"))?;
    let mut plane = plane.ok_or_else(|| malformed("no scan"))?;
    file.width = f.width;
    file.height = f.height;
    file.component_id = f.component_id;
    file.quant_table_id = f.quant_id;
    plane.table = file.quant_tables[f.quant_id as usize]
        .ok_or_else(|| malformed(format!("quantization table {} not defined", f.quant_id)))?;
    Ok((file, plane))
}

fn read_dqt(mut body: &[u8], file: &mut JpegFile) -> Result<()> {
    while !body.is_empty() {
        let pq = body[0] >> 4;
        let tq = (body[0] & 0x0F) as usize;
        if tq > 3 {
            return Err(malformed("DQT id > 3"));
        }
        let mut zz = [0u16; 64];
        let used = match pq {
            0 => {
                let v = body.get(1..65).ok_or_else(|| malformed("short DQT"))?;
                for (d, &s) in zz.iter_mut().zip(v) {
                    *d = s as u16;
                }
                65
            }
            1 => {
                let v = body.get(1..129).ok_or_else(|| malformed("short DQT"))?;
                for (k, d) in zz.iter_mut().enumerate() {
                    *d = u16::from_be_bytes([v[2 * k], v[2 * k + 1]]);
                }
                129
            }
            _ => return Err(malformed("DQT precision")),
        };
        let table = QuantTable::from_zigzag(&zz).map_err(|e| match e {
            StegoError::InvalidQuantTable(s) => unsupported(s),
            other => other,
        })?;
        file.quant_tables[tq] = Some(table);
        body = &body[used..];
    }
    Ok(())
}

fn read_dht(mut body: &[u8], file: &mut JpegFile) -> Result<()> {
    while !body.is_empty() {
        if body.len() < 17 {
            return Err(malformed("short DHT"));
        }
        let class = body[0] >> 4;
        let id = (body[0] & 0x0F) as usize;
        if class > 1 || id > 3 {
            return Err(malformed("DHT class/id"));
        }
        let mut bits = [0u8; 16];
        bits.copy_from_slice(&body[1..17]);
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        let values = body.get(17..17 + total).ok_or_else(|| malformed("short DHT"))?;
        let table = HuffmanTable::new(bits, values.to_vec())?;
        if class == 0 {
            file.dc_tables[id] = Some(table);
        } else {
            file.ac_tables[id] = Some(table);
        }
        body = &body[17 + total..];
    }
    Ok(())
}

fn read_sof(body: &[u8]) -> Result<Frame> {
    if body.len() < 6 {
        return Err(malformed("short SOF"));
    }
    if body[0] != 8 {
        return Err(unsupported(format!("{}-bit samples", body[0])));
    }
    let height = read_u16(body, 1)?;
    let width = read_u16(body, 3)?;
    let ncomp = body[5];
    if ncomp != 1 {
        return Err(unsupported(format!("{ncomp} components")));
    }
    if height == 0 {
        return Err(unsupported("height defined by DNL"));
    }
    if width == 0 {
        return Err(malformed("zero width"));
    }
    let comp = body.get(6..9).ok_or_else(|| malformed("short SOF"))?;
    if comp[2] > 3 {
        return Err(malformed("quantization table id > 3"));
    }
    Ok(Frame { width, height, component_id: comp[0], quant_id: comp[2] })
}

fn read_scan(
    bytes: &[u8],
    data_start: usize,
    header: &[u8],
    frame: &Frame,
    file: &JpegFile,
) -> Result<(CoefficientPlane, usize)> {
    if header.first() != Some(&1) || header.len() < 6 {
        return Err(unsupported("scan must contain exactly one component"));
    }
    if header[1] != frame.component_id {
        return Err(malformed("scan references unknown component"));
    }
    let (td, ta) = ((header[2] >> 4) as usize, (header[2] & 0x0F) as usize);
    let (ss, se, ahal) = (header[3], header[4], header[5]);
    if ss != 0 || se != 63 || ahal != 0 {
        return Err(unsupported("spectral selection / successive approximation"));
    }
    let dc = file.dc_tables.get(td).and_then(|t| t.as_ref()).ok_or_else(|| malformed("missing DC table"))?;
    let ac = file.ac_tables.get(ta).and_then(|t| t.as_ref()).ok_or_else(|| malformed("missing AC table"))?;

    let table = file.quant_tables[frame.quant_id as usize].unwrap_or_else(QuantTable::annex_k);
    let mut plane = CoefficientPlane::zeros(frame.width as usize, frame.height as usize, table);
    let mut br = BitReader::new(bytes, data_start);
    let mut pred = 0i32;
    let ri = file.restart_interval as usize;
    let mut rst = 0u8;

    let nblocks = plane.num_blocks();
    for i in 0..nblocks {
        if ri > 0 && i > 0 && i % ri == 0 {
            br.restart(rst)?;
            rst = (rst + 1) % 8;
            pred = 0;
        }
        let block = &mut plane.blocks[i];
        let size = dc.decode(|| br.bit())? as u32;
        if size > 11 {
            return Err(malformed("DC category > 11"));
        }
        pred += extend(br.bits(size)?, size);
        block[0] = pred;
        let mut k = 1;
        while k < 64 {
            let rs = ac.decode(|| br.bit())?;
            let (run, size) = ((rs >> 4) as usize, (rs & 0x0F) as u32);
            if size == 0 {
                if run == 15 {
                    k += 16;
                    continue;
                }
                break;
            }
            k += run;
            if k > 63 {
                return Err(malformed("AC run past end of block"));
            }
            block[ZIGZAG[k]] = extend(br.bits(size)?, size);
            k += 1;
        }
        if k > 64 {
            return Err(malformed("ZRL past end of block"));
        }
    }

    // skip any padding up to the next marker
    let mut pos = br.pos;
    while pos < bytes.len() {
        if bytes[pos] == 0xFF && bytes.get(pos + 1).is_some_and(|&b| b != 0x00) {
            break;
        }
        pos += 1;
    }
    Ok((plane, pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::{quant_table_from_qf, PixelPlane};
    use crate::stream::serialize;

    fn sample_file() -> Vec<u8> {
        let s: Vec<u8> = (0..24 * 16).map(|i| ((i * 37) % 251) as u8).collect();
        let c = PixelPlane::new(24, 16, s).unwrap().compress(&quant_table_from_qf(90).unwrap());
        serialize(&c).unwrap()
    }

    #[test]
    fn truncated_stream_is_malformed() {
        let bytes = sample_file();
        for cut in [3, 40, bytes.len() / 2, bytes.len() - 3] {
            let r = parse(&bytes[..cut]);
            assert!(matches!(r, Err(StegoError::MalformedJpeg(_))), "cut {cut}: {r:?}");
        }
    }

    #[test]
    fn progressive_and_color_are_unsupported() {
        let mut bytes = sample_file();
        let sof = bytes.windows(2).position(|w| w == [0xFF, 0xC0]).unwrap();
        bytes[sof + 1] = 0xC2;
        assert!(matches!(parse(&bytes), Err(StegoError::UnsupportedJpeg(_))));

        let mut bytes = sample_file();
        bytes[sof + 4 + 5] = 3;
        assert!(matches!(parse(&bytes), Err(StegoError::UnsupportedJpeg(_))));

        let mut bytes = sample_file();
        bytes[sof + 4] = 12;
        assert!(matches!(parse(&bytes), Err(StegoError::UnsupportedJpeg(_))));
    }

    #[test]
    fn extend_sign() {
        assert_eq!(extend(0, 1), -1);
        assert_eq!(extend(1, 1), 1);
        assert_eq!(extend(0b00, 2), -3);
        assert_eq!(extend(0b11, 2), 3);
    }

    /// Hand-built file with DRI = 1 and RST markers between blocks.
    #[test]
    fn honours_restart_markers() {
        let c = {
            let mut p = crate::jpeg::CoefficientPlane::zeros(16, 8, quant_table_from_qf(50).unwrap());
            p.blocks[0][0] = 3;
            p.blocks[1][0] = 3;
            p
        };
        let single = |dc: i32| {
            let mut p = crate::jpeg::CoefficientPlane::zeros(8, 8, c.table);
            p.blocks[0][0] = dc;
            let b = serialize(&p).unwrap();
            let sos = b.windows(2).position(|w| w == [0xFF, 0xDA]).unwrap();
            let start = sos + 10;
            (b[..start].to_vec(), b[start..b.len() - 2].to_vec())
        };
        let (mut head, scan0) = single(3);
        let (_, scan1) = single(3); // DC prediction resets after RST
        // widen the frame to 16 pixels and insert DRI before SOS
        let sof = head.windows(2).position(|w| w == [0xFF, 0xC0]).unwrap();
        head[sof + 8] = 16;
        let sos = head.windows(2).position(|w| w == [0xFF, 0xDA]).unwrap();
        let mut bytes = head[..sos].to_vec();
        bytes.extend_from_slice(&[0xFF, 0xDD, 0, 4, 0, 1]);
        bytes.extend_from_slice(&head[sos..]);
        bytes.extend_from_slice(&scan0);
        bytes.extend_from_slice(&[0xFF, 0xD0]);
        bytes.extend_from_slice(&scan1);
        bytes.extend_from_slice(&[0xFF, 0xD9]);
        let (file, p) = parse(&bytes).unwrap();
        assert_eq!(file.restart_interval, 1);
        assert_eq!(p.blocks, c.blocks);
    }
}
