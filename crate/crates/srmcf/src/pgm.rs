//! Binary 8-bit PGM (P5) images.

use std::fs;
use std::path::Path;

use crate::error::{AppError, Result};

/// Row-major grayscale image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "image data size");
        Image { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, v: f64) -> Self {
        Image::new(rows, cols, vec![v; rows * cols])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Encodes `[0, 1]` values, clamping outside that range.
pub fn encode(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.extend(
        img.data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

/// Linear map of `[min, max]` onto `[0, 255]`; a constant slice maps to 0.
pub fn normalized(rows: usize, cols: usize, values: &[f64]) -> Image {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let data = values
        .iter()
        .map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect();
    Image::new(rows, cols, data)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Image> {
    let bad = |reason: &str| AppError::format(path, reason.to_string());
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let mut num = || -> Result<usize> { token()?.parse().map_err(|_| bad("bad header number")) };
    let (cols, rows, maxval) = (num()?, num()?, num()?);
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit PGM is supported"));
    }
    let payload = bytes
        .get(pos + 1..)
        .ok_or_else(|| bad("truncated header"))?;
    if payload.len() != rows * cols {
        return Err(bad("payload size differs from header"));
    }
    let data = payload.iter().map(|&b| b as f64 / maxval as f64).collect();
    Ok(Image::new(rows, cols, data))
}

pub fn write(path: &Path, img: &Image) -> Result<()> {
    fs::write(path, encode(img)).map_err(|e| AppError::io(path, e))
}

pub fn read(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    decode(&bytes, path)
}
