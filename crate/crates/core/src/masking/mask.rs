use std::path::Path;

use super::MaskError;
use crate::imgcore::{encode_gray8_png, ImageError, SdrImage};

/// Set of pixels on a `width x height` grid.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} set)", self.width, self.height, self.count())?;
        if self.width <= 64 && self.height <= 64 {
            for row in self.bits.chunks(self.width) {
                let s: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
                writeln!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 || width * height != bits.len() {
            return Err(MaskError::InvalidDimensions {
                width,
                height,
                len: bits.len(),
            });
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Membership test that treats out-of-frame coordinates as unset.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dimensions() == other.dimensions()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn ensure_same_size(&self, other: &BinaryMask) -> Result<(), MaskError> {
        if self.dimensions() != other.dimensions() {
            return Err(MaskError::DimensionMismatch {
                left: self.dimensions(),
                right: other.dimensions(),
            });
        }
        Ok(())
    }

    /// 8-bit PNG with 255 for set pixels.
    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        let values: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        encode_gray8_png(self.width, self.height, &values)
    }

    /// Inverse of [`Self::to_png`]; any non-zero value counts as set.
    pub fn from_png(bytes: &[u8]) -> Result<Self, MaskError> {
        let (w, h, values) = crate::imgcore::decode_gray8_png(bytes)?;
        Self::from_bits(w, h, values.into_iter().map(|v| v != 0).collect())
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_png()?).map_err(|e| ImageError::io(path, e))
    }
}

/// Pixelwise AND.
pub fn intersect(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask, MaskError> {
    a.ensure_same_size(b)?;
    Ok(BinaryMask {
        width: a.width,
        height: a.height,
        bits: a.bits.iter().zip(&b.bits).map(|(&x, &y)| x && y).collect(),
    })
}

/// Pixels whose largest channel reaches `threshold`.
pub fn saturation_mask(img: &SdrImage, threshold: f32) -> BinaryMask {
    debug_assert!(threshold > 0.0 && threshold < 1.0);
    BinaryMask {
        width: img.width(),
        height: img.height(),
        bits: img
            .pixels()
            .iter()
            .map(|px| px[0].max(px[1]).max(px[2]) >= threshold)
            .collect(),
    }
}

/// Per-pixel alpha in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    width: usize,
    height: usize,
    alpha: Vec<f32>,
}

impl SoftMask {
    pub fn new(width: usize, height: usize, alpha: Vec<f32>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 || width * height != alpha.len() {
            return Err(MaskError::InvalidDimensions {
                width,
                height,
                len: alpha.len(),
            });
        }
        if let Some((index, &value)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !(0.0..=1.0).contains(*a))
        {
            return Err(MaskError::InvalidWeight { index, value });
        }
        Ok(SoftMask {
            width,
            height,
            alpha,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        SoftMask {
            width,
            height,
            alpha: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.alpha[y * self.width + x]
    }

    pub fn alpha(&self) -> &[f32] {
        &self.alpha
    }

    /// Zeroes alpha wherever `support` is unset.
    pub fn restrict(&self, support: &BinaryMask) -> Result<SoftMask, MaskError> {
        if self.dimensions() != support.dimensions() {
            return Err(MaskError::DimensionMismatch {
                left: self.dimensions(),
                right: support.dimensions(),
            });
        }
        let alpha = self
            .alpha
            .iter()
            .zip(support.bits())
            .map(|(&a, &keep)| if keep { a } else { 0.0 })
            .collect();
        Ok(SoftMask {
            width: self.width,
            height: self.height,
            alpha,
        })
    }

    pub fn threshold(&self, t: f32) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.alpha.iter().map(|&a| a >= t).collect(),
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        let values: Vec<u8> = self
            .alpha
            .iter()
            .map(|&a| (a * 255.0).round() as u8)
            .collect();
        encode_gray8_png(self.width, self.height, &values)
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_png()?).map_err(|e| ImageError::io(path, e))
    }
}
