//! Exposure estimation for generated content and the virtual bracket stack.
//!
//! Generated content is assumed well exposed, so the exposure it "was taken
//! at" is the one that maps its darkest (robustly: a low quantile) linear
//! luminance to 1. Each distinct estimate becomes a bracket of the stack.

mod bracket;
mod stack;

use serde::Serialize;

pub use self::bracket::{expose, propagate, synthesize_bracket, Bracket, BracketStack, Patch};
pub use self::stack::{build_stack, ClassJob, ClassOutcome, StackBuild, StackSettings};

use crate::imgcore::{luminance, ImageError, ResponseCurve, SdrImage};
use crate::inpaint::BackendError;
use crate::masking::{BinaryMask, MaskError, SemanticClass};

pub const DEFAULT_PERCENTILE: f64 = 0.02;
pub const MIN_EV: f64 = -10.0;
/// Estimates this close to an existing bracket reuse it.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 0.25;

#[derive(Debug, thiserror::Error)]
pub enum ExposureError {
    #[error("exposure region is empty")]
    EmptyRegion,
    #[error("{count} region pixels have zero luminance")]
    ZeroLuminance { count: usize },
    #[error("percentile {0} outside (0, 1]")]
    InvalidPercentile(f64),
    #[error("invalid exposure value {0}")]
    InvalidEv(f64),
    #[error("no bracket at ev {0}")]
    UnknownEv(f64),
    #[error("bracket stack is invalid: {0}")]
    InvalidStack(String),
    #[error("inpainting {class} failed: {source}")]
    Backend {
        class: SemanticClass,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposureEstimate {
    /// Stops relative to the input, in `[-10, 0]`.
    pub ev: f64,
    /// Luminance at the chosen quantile; `ev = log2(reference)` unless clamped.
    pub reference: f64,
    pub percentile_used: f64,
    pub pixel_count: usize,
}

/// 0-based index into the ascending sort: `ceil(p * n)`, capped at `n - 1`.
/// The small slack keeps `0.02 * 100` from rounding up to 3.
pub fn quantile_index(n: usize, p: f64) -> usize {
    debug_assert!(n > 0);
    let k = (p * n as f64 - 1e-9).ceil().max(0.0) as usize;
    k.min(n - 1)
}

/// Exposure from raw linear luminances of a region.
pub fn exposure_from_luminances(
    mut lums: Vec<f64>,
    p: f64,
) -> Result<ExposureEstimate, ExposureError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ExposureError::InvalidPercentile(p));
    }
    if lums.is_empty() {
        return Err(ExposureError::EmptyRegion);
    }
    let zeros = lums.iter().filter(|&&l| l.is_nan() || l <= 0.0).count();
    if zeros > 0 {
        return Err(ExposureError::ZeroLuminance { count: zeros });
    }
    let n = lums.len();
    let k = quantile_index(n, p);
    let (_, reference, _) = lums.select_nth_unstable_by(k, f64::total_cmp);
    let reference = *reference;
    Ok(ExposureEstimate {
        ev: reference.log2().clamp(MIN_EV, 0.0),
        reference,
        percentile_used: p,
        pixel_count: n,
    })
}

/// Linearizes the region of `h` and takes the low `p`-quantile of luminance.
pub fn estimate_exposure(
    h: &SdrImage,
    region: &BinaryMask,
    p: f64,
    crf: ResponseCurve,
) -> Result<ExposureEstimate, ExposureError> {
    if h.dimensions() != region.dimensions() {
        return Err(ImageError::DimensionMismatch {
            expected: h.dimensions(),
            found: region.dimensions(),
        }
        .into());
    }
    let lums = h
        .pixels()
        .iter()
        .zip(region.bits())
        .filter(|(_, &on)| on)
        .map(|(px, _)| luminance(px.map(|c| crf.to_linear(c))))
        .collect();
    exposure_from_luminances(lums, p)
}
