//! 8-bit grayscale file access.
//!
//! Reading detects the format from the file's leading bytes; writing picks it
//! from the extension (`.pgm` or `.png`). Samples are read as-is (no scaling)
//! and written rounded half-up and clamped to `[0, 255]`.
//!
//! PGM files are written as binary P5:
//!
//! ```text
//! "P5" 0x0A <width ASCII decimal> 0x20 <height ASCII decimal> 0x0A "255" 0x0A
//! <width * height bytes, row-major, top row first>
//! ```
//!
//! The reader accepts any header whitespace and `#` comments allowed by the
//! netpbm format, and `maxval` up to 255. A single whitespace byte separates
//! `maxval` from the raster. `maxval > 255` (16-bit), ASCII `P2` and colour
//! `P3`/`P6` are rejected.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).at(path))?;
    decode(&bytes).map_err(|e| e.at(path))
}

pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("pgm") => encode_pgm(img),
        Some("png") => encode_png(img)?,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "cannot infer output format from extension {other:?} (use .pgm or .png)"
            ))
            .at(path))
        }
    };
    fs::write(path, bytes).map_err(|e| Error::from(e).at(path))
}

/// Decodes a PGM or PNG byte buffer.
pub fn decode(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P") && bytes.len() >= 2 {
        decode_pgm(bytes)
    } else {
        Err(Error::UnsupportedFormat(
            "neither a PNG nor a netpbm file".to_string(),
        ))
    }
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::Malformed {
        format: "PGM",
        reason: reason.into(),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(format!("{what} out of range")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    match &bytes[..2] {
        b"P5" => {}
        b"P2" => {
            return Err(Error::UnsupportedFormat(
                "ASCII PGM (P2); only binary P5 is supported".into(),
            ))
        }
        b"P3" | b"P6" => {
            return Err(Error::UnsupportedFormat(
                "colour PPM input; grayscale required".into(),
            ))
        }
        m => {
            return Err(Error::UnsupportedFormat(format!(
                "netpbm magic {:?}",
                String::from_utf8_lossy(m)
            )))
        }
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 {
        return Err(malformed("maxval is zero"));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "16-bit PGM (maxval {maxval})"
        )));
    }
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(malformed("no whitespace after maxval"));
    }
    let start = cur.pos + 1;
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| malformed("dimensions overflow"))?;
    let raster = bytes
        .get(start..start + expected)
        .ok_or_else(|| {
            malformed(format!(
                "raster truncated: expected {expected} bytes, found {}",
                bytes.len().saturating_sub(start)
            ))
        })?;
    Image::new(width, height, raster.iter().map(|&b| b as f64).collect())
}

pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.quantized());
    out
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let png_err = |e: png::DecodingError| Error::Malformed {
        format: "PNG",
        reason: e.to_string(),
    };
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(png_err)?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    match (info.color_type, info.bit_depth) {
        (png::ColorType::Grayscale, png::BitDepth::Eight) => {}
        (png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha, depth) => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG {:?} at {depth:?}; only 8-bit grayscale without alpha is supported",
                info.color_type
            )))
        }
        (color, _) => {
            return Err(Error::UnsupportedFormat(format!(
                "colour PNG ({color:?}); grayscale required"
            )))
        }
    }
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| Error::Malformed {
        format: "PNG",
        reason: "image too large".into(),
    })?];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    let stride = frame.line_size;
    let mut pixels = Vec::with_capacity(width * height);
    for row in buf.chunks(stride).take(height) {
        pixels.extend(row[..width].iter().map(|&b| b as f64));
    }
    Image::new(width, height, pixels)
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let enc_err = |e: png::EncodingError| Error::Malformed {
        format: "PNG",
        reason: e.to_string(),
    };
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(enc_err)?;
        writer.write_image_data(&img.quantized()).map_err(enc_err)?;
    }
    Ok(out)
}
