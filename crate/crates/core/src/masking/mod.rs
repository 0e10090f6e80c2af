//! Clipping detection, per-class masks, guided opening and soft guides.

mod feather;
mod labels;
mod mask;
mod morphology;

pub use self::feather::{feather, signed_distance};
pub use self::labels::{class_mask, SemanticClass, SemanticLabeling, CLASS_COUNT};
pub use self::mask::{intersect, saturation_mask, BinaryMask, SoftMask};
pub use self::morphology::{dilate, erode, inpaint_mask, DiskKernel, MAX_RADIUS, MIN_RADIUS};

use crate::imgcore::ImageError;

/// Default saturation threshold: 250 on the 8-bit scale.
pub const DEFAULT_SAT_THRESHOLD: f32 = 250.0 / 255.0;
pub const DEFAULT_CLASS_THRESHOLD: f32 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("mask dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("class id {0} out of range 0..=8")]
    ClassOutOfRange(usize),
    #[error("{name} = {value} outside [{min}, {max}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("label weight {value} at pixel {index} outside [0, 1]")]
    InvalidWeight { index: usize, value: f32 },
    #[error("label value {value} at pixel {index} is not a class id")]
    InvalidLabel { index: usize, value: u8 },
    #[error("invalid dimensions {width}x{height} for {len} entries")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
}
