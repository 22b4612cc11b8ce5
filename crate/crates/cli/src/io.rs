//! Image and edge-map files.
//!
//! PNG and binary PGM/PPM go through the `image` crate and are quantized to
//! 8 bits on write. Files ending in `.gfcf` hold raw little-endian `f32`
//! samples behind a 16-byte header: the magic `GFCF`, then height, width and
//! channel count as `u32`. Samples are stored channel by channel, row-major.

use std::fs;
use std::path::{Path, PathBuf};

use gfc_core::field::{MultiChannelImage, ScalarField};
use gfc_core::EdgeMap;
use image::{DynamicImage, GrayImage, RgbImage};

use crate::error::{CliError, Result};

const MAGIC: &[u8; 4] = b"GFCF";

fn is_raw(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("gfcf"))
}

pub fn is_image_file(path: &Path) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("png" | "pgm" | "ppm" | "pnm" | "gfcf"))
}

pub fn load_image(path: &Path) -> Result<MultiChannelImage<f64>> {
    if !path.exists() {
        return Err(CliError::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")));
    }
    if is_raw(path) {
        return load_raw(path);
    }
    let img = image::open(path).map_err(|e| CliError::format(path, e.to_string()))?;
    let channels = if img.color().has_color() {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        (0..3)
            .map(|k| {
                ScalarField::from_fn(h as usize, w as usize, |r, c| f64::from(rgb.get_pixel(c as u32, r as u32)[k]))
            })
            .collect()
    } else {
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        vec![ScalarField::from_fn(h as usize, w as usize, |r, c| {
            f64::from(gray.get_pixel(c as u32, r as u32)[0])
        })]
    };
    Ok(MultiChannelImage::new(channels)?)
}

fn load_raw(path: &Path) -> Result<MultiChannelImage<f64>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(CliError::format(path, "missing GFCF header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("four bytes")) as usize;
    let (h, w, n) = (word(1), word(2), word(3));
    let count = h
        .checked_mul(w)
        .and_then(|p| p.checked_mul(n))
        .ok_or_else(|| CliError::format(path, "header dimensions overflow"))?;
    if bytes.len() != 16 + 4 * count {
        return Err(CliError::format(
            path,
            format!("expected {} bytes of samples for {h}x{w}x{n}, found {}", 4 * count, bytes.len() - 16),
        ));
    }
    let samples: Vec<f64> = bytes[16..]
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes(b.try_into().expect("four bytes"))))
        .collect();
    if n == 0 || h * w == 0 {
        return Err(CliError::format(path, "empty image"));
    }
    let channels = samples
        .chunks_exact(h * w)
        .map(|plane| ScalarField::new(h, w, plane.to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MultiChannelImage::new(channels)?)
}

/// Nearest 8-bit level, ties to even.
pub fn quantize(v: f64) -> u8 {
    v.round_ties_even().clamp(0.0, 255.0) as u8
}

pub fn save_image(path: &Path, img: &MultiChannelImage<f64>) -> Result<()> {
    if is_raw(path) {
        return save_raw(path, img);
    }
    let (h, w) = img.shape();
    let (h32, w32) = (h as u32, w as u32);
    let dynamic = match img.channels() {
        [gray] => DynamicImage::ImageLuma8(GrayImage::from_fn(w32, h32, |c, r| {
            image::Luma([quantize(gray.get(r as usize, c as usize))])
        })),
        [red, green, blue] => DynamicImage::ImageRgb8(RgbImage::from_fn(w32, h32, |c, r| {
            let (r, c) = (r as usize, c as usize);
            image::Rgb([quantize(red.get(r, c)), quantize(green.get(r, c)), quantize(blue.get(r, c))])
        })),
        _ => unreachable!("images hold one or three channels"),
    };
    dynamic.save(path).map_err(|e| CliError::format(path, e.to_string()))
}

fn save_raw(path: &Path, img: &MultiChannelImage<f64>) -> Result<()> {
    let (h, w) = img.shape();
    let mut bytes = Vec::with_capacity(16 + 4 * h * w * img.channel_count());
    bytes.extend_from_slice(MAGIC);
    for v in [h, w, img.channel_count()] {
        bytes.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for ch in img.channels() {
        for &v in ch.values() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Edge map at the given image size, rescaled to `[0, 1]`.
pub fn load_edge_map(path: &Path, shape: (usize, usize)) -> Result<EdgeMap> {
    let raw = load_image(path)?.channel_mean();
    if raw.shape() != shape {
        return Err(CliError::format(
            path,
            format!("edge map is {:?} but the image is {:?}", raw.shape(), shape),
        ));
    }
    Ok(EdgeMap::from_field(&raw)?)
}

/// Binary mask: pixels at or above half the brightest value are inside.
pub fn load_mask(path: &Path) -> Result<ScalarField<f64>> {
    let raw = load_image(path)?.channel_mean();
    let cut = 0.5 * raw.values().iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(raw.map(|v| if cut > 0.0 && v >= cut { 1.0 } else { 0.0 }))
}

/// Image files in a directory, sorted by name; a file path yields itself.
pub fn collect_inputs(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no images found", path.display())));
    }
    Ok(files)
}
