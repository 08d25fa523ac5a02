//! Lossless image files: 8-bit PNG and binary PGM/PPM.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Pnm,
}

/// Reads an image, choosing the decoder from the file's magic bytes.
pub fn load_image(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::NotFound(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<Raster> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && (b'1'..=b'7').contains(&bytes[1]) {
        Err(Error::UnsupportedFormat(format!(
            "netpbm variant P{} (only binary P5/P6 are supported)",
            bytes[1] as char
        )))
    } else {
        Err(Error::UnsupportedFormat("unrecognized file signature".into()))
    }
}

/// Writes an image; the encoder is chosen from the extension (`png`, `pgm`, `ppm`).
pub fn save_image(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(raster, format_for_path(path, raster)?)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn format_for_path(path: &Path, raster: &Raster) -> Result<Format> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match (ext.as_str(), raster.channels()) {
        ("png", _) => Ok(Format::Png),
        ("pgm", 1) | ("ppm", 3) => Ok(Format::Pnm),
        ("pgm", c) | ("ppm", c) => Err(Error::UnsupportedFormat(format!(
            ".{ext} cannot hold {c}-channel data"
        ))),
        _ => Err(Error::UnsupportedFormat(format!(
            "unknown extension '{ext}' (expected png, pgm or ppm)"
        ))),
    }
}

fn encode(raster: &Raster, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Png => encode_png(raster),
        Format::Pnm => Ok(encode_pnm(raster)),
    }
}

pub fn encode_png(raster: &Raster) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(
            BufWriter::new(&mut out),
            raster.width() as u32,
            raster.height() as u32,
        );
        enc.set_color(if raster.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::InvalidRaster(e.to_string()))?;
        writer
            .write_image_data(raster.data())
            .map_err(|e| Error::InvalidRaster(e.to_string()))?;
        writer
            .finish()
            .map_err(|e| Error::InvalidRaster(e.to_string()))?;
    }
    Ok(out)
}

fn decode_png(bytes: &[u8]) -> Result<Raster> {
    let mut decoder = png::Decoder::new(bytes);
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Corrupt(e.to_string()))?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err(Error::UnsupportedBitDepth("16-bit PNG".into()));
    }
    let (color, depth) = reader.output_color_type();
    if depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedBitDepth(format!("{depth:?}")));
    }
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {other:?} (alpha is not supported)"
            )))
        }
    };
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Corrupt(e.to_string()))?;
    buf.truncate(frame.buffer_size());
    Raster::new(frame.width as usize, frame.height as usize, channels, buf)
}

fn encode_pnm(raster: &Raster) -> Vec<u8> {
    let magic = if raster.channels() == 1 { "P5" } else { "P6" };
    let mut out = Vec::with_capacity(raster.data().len() + 32);
    write!(out, "{magic}\n{} {}\n255\n", raster.width(), raster.height())
        .expect("writing to a Vec cannot fail");
    out.extend_from_slice(raster.data());
    out
}

fn decode_pnm(bytes: &[u8]) -> Result<Raster> {
    let channels = if &bytes[..2] == b"P5" { 1 } else { 3 };
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in header.iter_mut() {
        *field = read_pnm_uint(bytes, &mut pos)?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Corrupt(format!("invalid maxval {maxval}")));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedBitDepth(format!("PNM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Corrupt("truncated PNM header".into()));
    }
    pos += 1;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Corrupt("PNM dimensions overflow".into()))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::Corrupt(format!(
            "PNM payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    Raster::new(width, height, channels, payload[..expected].to_vec())
        .map_err(|e| Error::Corrupt(e.to_string()))
}

fn read_pnm_uint(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::Corrupt("truncated PNM header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Corrupt("malformed PNM header field".into()))
}
