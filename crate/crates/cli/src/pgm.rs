//! Binary 8-bit portable graymap previews.

use std::path::Path;

use crate::error::CliError;

/// P5 bytes with linear min–max scaling to `0..=255`; a constant image is
/// all black.
pub fn encode_pgm(width: usize, height: usize, values: &[f64]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

pub fn write_pgm(path: &Path, n: usize, values: &[f64]) -> Result<(), CliError> {
    std::fs::write(path, encode_pgm(n, n, values)).map_err(|e| CliError::io(path, e))
}
