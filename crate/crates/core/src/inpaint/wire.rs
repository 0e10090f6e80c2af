//! JSON bodies of the model-service protocol.
//!
//! `POST /v1/segment` takes [`SegmentBody`] and answers [`LabelsBody`];
//! `POST /v1/inpaint` takes [`InpaintBody`] and answers [`ImageBody`]. Any
//! non-200 answer carries an [`ErrorBody`].

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::BackendError;

pub const SEGMENT_PATH: &str = "/v1/segment";
pub const INPAINT_PATH: &str = "/v1/inpaint";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentBody {
    pub image_png_b64: String,
}

/// 8-bit grayscale PNG of hard class labels `0..=8`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelsBody {
    pub labels_png_b64: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InpaintBody {
    pub image_png_b64: String,
    /// 8-bit grayscale PNG; 255 marks pixels to fill.
    pub mask_png_b64: String,
    pub prompt: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageBody {
    pub image_png_b64: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

pub fn encode_b64(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub fn decode_b64(field: &str, text: &str) -> Result<Vec<u8>, BackendError> {
    STANDARD
        .decode(text)
        .map_err(|e| BackendError::Malformed(format!("{field}: {e}")))
}
