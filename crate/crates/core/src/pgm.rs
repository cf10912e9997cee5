//! Netpbm graymap (P2 ASCII and P5 binary) reading and writing.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::imaging::Image;

/// Sample encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    /// P2, one row of decimal samples per line.
    Ascii,
    /// P5, one byte per sample, or two big-endian bytes when maxval > 255.
    #[default]
    Binary,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments.
    fn skip_space(&mut self) {
        while let Some(&c) = self.buf.get(self.pos) {
            if c == b'#' {
                while self.buf.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.buf.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("expected {what} at byte {start}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Image> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(Error::Pgm("missing P2/P5 magic number".into())),
    };
    let mut cur = Cursor { buf: bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Pgm(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image dimensions overflow".into()))?;
    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if !cur.buf.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(Error::Pgm("missing whitespace after maxval".into()));
        }
        let raster = &bytes[cur.pos + 1..];
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        if raster.len() < need {
            return Err(Error::Pgm(format!(
                "raster has {} bytes, expected {need}",
                raster.len()
            )));
        }
        if wide {
            raster[..need]
                .chunks_exact(2)
                .map(|b| u16::from_be_bytes([b[0], b[1]]))
                .collect()
        } else {
            raster[..need].iter().map(|&b| u16::from(b)).collect()
        }
    } else {
        (0..count)
            .map(|_| cur.number("sample").map(|v| v as u16))
            .collect::<Result<Vec<_>>>()?
    };
    if let Some(p) = pixels.iter().find(|&&p| u32::from(p) > maxval) {
        return Err(Error::Pgm(format!("sample {p} exceeds maxval {maxval}")));
    }
    Image::new(width, height, maxval as u16, pixels)
}

pub fn encode(img: &Image, format: PgmFormat) -> Vec<u8> {
    let magic = match format {
        PgmFormat::Ascii => "P2",
        PgmFormat::Binary => "P5",
    };
    let mut out = format!(
        "{magic}\n{} {}\n{}\n",
        img.width(),
        img.height(),
        img.maxval()
    )
    .into_bytes();
    match format {
        PgmFormat::Binary if img.maxval() > 255 => {
            out.extend(img.pixels().iter().flat_map(|p| p.to_be_bytes()));
        }
        PgmFormat::Binary => out.extend(img.pixels().iter().map(|&p| p as u8)),
        PgmFormat::Ascii => {
            for row in img.pixels().chunks(img.width().max(1)) {
                let line: Vec<String> = row.iter().map(u16::to_string).collect();
                out.extend(line.join(" ").into_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

pub fn read(mut r: impl Read) -> Result<Image> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn write(mut w: impl Write, img: &Image, format: PgmFormat) -> Result<()> {
    w.write_all(&encode(img, format))?;
    Ok(())
}

/// Format of a raw PGM buffer, from its magic number.
pub fn detect_format(bytes: &[u8]) -> Option<PgmFormat> {
    match bytes.get(..2)? {
        b"P2" => Some(PgmFormat::Ascii),
        b"P5" => Some(PgmFormat::Binary),
        _ => None,
    }
}
