//! Image file formats: 8-bit RGB PNG import and the raw float interchange
//! format.
//!
//! Raw layout: a 16-byte little-endian header of `u32` width, height,
//! channels (always 3) and a reserved zero, followed by `f32` samples,
//! plane-major (all R, then all G, then all B), each plane row-major.

use std::io::{Read, Write};
use std::path::Path;

use puree_core::imaging::PatchImage;

use crate::error::{format_err, io_err, PureeError, Result};

const HEADER_LEN: usize = 16;
const CHANNELS: u32 = 3;

/// Serializes a patch to the raw float format.
pub fn encode_raw(p: &PatchImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * p.as_slice().len());
    for v in [p.width() as u32, p.height() as u32, CHANNELS, 0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in p.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses the raw float format; `origin` names the source in errors.
pub fn decode_raw(bytes: &[u8], origin: &Path) -> Result<PatchImage> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(origin, "truncated header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    let (width, height, channels) = (word(0) as usize, word(1) as usize, word(2));
    if channels != CHANNELS {
        return Err(format_err(
            origin,
            format!("expected 3 channels, found {channels}"),
        ));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3 * 4))
        .ok_or_else(|| format_err(origin, "image dimensions overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(format_err(
            origin,
            format!(
                "expected {expected} data bytes for {width}x{height}, found {}",
                body.len()
            ),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    PatchImage::from_planes(height, width, data).map_err(|e| format_err(origin, e.to_string()))
}

pub fn write_raw(path: &Path, p: &PatchImage) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&encode_raw(p)).map_err(io_err(path))
}

pub fn read_raw(path: &Path) -> Result<PatchImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    decode_raw(&bytes, path)
}

/// Loads an image with the `image` crate, converting to 8-bit RGB and
/// scaling by 1/255.
pub fn load_png(path: &Path) -> Result<PatchImage> {
    let img = image::open(path)
        .map_err(|source| PureeError::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_rgb8();
    let (w, h) = img.dimensions();
    PatchImage::from_rgb8(h as usize, w as usize, img.as_raw())
        .map_err(|e| format_err(path, e.to_string()))
}

/// Writes an 8-bit RGB PNG preview of a patch.
pub fn save_png(path: &Path, p: &PatchImage) -> Result<()> {
    let mut buf = image::RgbImage::new(p.width() as u32, p.height() as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        let rgb = p.rgb(y as usize, x as usize);
        *px = image::Rgb(rgb.map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    buf.save(path).map_err(|source| PureeError::Image {
        path: path.to_path_buf(),
        source,
    })
}
