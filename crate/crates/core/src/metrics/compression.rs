//! Compression-based dissimilarity.
//!
//! The compressed size `C(·)` stands in for the uncomputable Kolmogorov
//! complexity. Two inputs that share structure compress well together, so
//! `C(xy)` stays close to `C(x)`; unrelated inputs do not.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Compressor {
    fn compressed_len(&self, data: &[u8]) -> Result<usize>;
}

/// Raw DEFLATE (LZ77 + Huffman) at a fixed level; stateless, so one value can
/// be shared across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Deflate {
    pub level: u32,
}

impl Default for Deflate {
    fn default() -> Self {
        Deflate { level: 9 }
    }
}

impl Compressor for Deflate {
    fn compressed_len(&self, data: &[u8]) -> Result<usize> {
        let mut enc = DeflateEncoder::new(Vec::with_capacity(data.len() / 2 + 64), Compression::new(self.level));
        enc.write_all(data)
            .map_err(|e| Error::Compressor(e.to_string()))?;
        let out = enc.finish().map_err(|e| Error::Compressor(e.to_string()))?;
        Ok(out.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NcdDenominator {
    /// `min(C(x), C(y))`.
    #[default]
    Min,
    /// `max(C(x), C(y))`, the usual literature form, bounded near [0, 1].
    Max,
}

/// Normalised compression distance
/// `(C(xy) − min(C(x), C(y))) / denom`, clipped below at 0.
pub fn ncd<C: Compressor + ?Sized>(
    x: &[u8],
    y: &[u8],
    compressor: &C,
    denominator: NcdDenominator,
) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let cx = compressor.compressed_len(x)? as f64;
    let cy = compressor.compressed_len(y)? as f64;
    let mut xy = Vec::with_capacity(x.len() + y.len());
    xy.extend_from_slice(x);
    xy.extend_from_slice(y);
    let cxy = compressor.compressed_len(&xy)? as f64;
    let denom = match denominator {
        NcdDenominator::Min => cx.min(cy),
        NcdDenominator::Max => cx.max(cy),
    };
    Ok(((cxy - cx.min(cy)) / denom).max(0.0))
}
