//! Generative inpainting and segmentation behind one blocking interface.
//!
//! [`MockBackend`] is deterministic and needs nothing external; it is what the
//! tests and the default CLI run use. [`HttpBackend`] talks to a model service
//! over HTTP/JSON with base64 PNG payloads.

pub mod conformance;
mod http;
mod mock;
pub mod wire;

use std::time::Duration;

pub use self::http::{HttpBackend, DEFAULT_TIMEOUT};
pub use self::mock::{MockBackend, DEFAULT_RHO_MIN};

use crate::imgcore::{ImageError, SdrImage};
use crate::masking::{BinaryMask, SemanticLabeling};

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("backend timed out after {0:?}")]
    Timeout(Duration),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("response dimensions {found:?} differ from request {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("server returned {status}: {message}")]
    Server { status: u16, message: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl BackendError {
    /// Whether repeating the identical request may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Timeout(_) | BackendError::Transport(_) => true,
            BackendError::Server { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

/// Image plus the pixels to regenerate. Borrowed so large rasters are not
/// copied per call.
#[derive(Debug, Clone, Copy)]
pub struct InpaintRequest<'a> {
    image: &'a SdrImage,
    mask: &'a BinaryMask,
    prompt: &'a str,
    seed: u64,
}

impl<'a> InpaintRequest<'a> {
    pub fn new(
        image: &'a SdrImage,
        mask: &'a BinaryMask,
        prompt: &'a str,
        seed: u64,
    ) -> Result<Self, BackendError> {
        if image.dimensions() != mask.dimensions() {
            return Err(BackendError::InvalidRequest(format!(
                "mask is {:?} but image is {:?}",
                mask.dimensions(),
                image.dimensions()
            )));
        }
        if mask.is_empty() {
            return Err(BackendError::InvalidRequest("mask selects no pixels".into()));
        }
        if prompt.trim().is_empty() {
            return Err(BackendError::InvalidRequest("empty prompt".into()));
        }
        Ok(InpaintRequest {
            image,
            mask,
            prompt,
            seed,
        })
    }

    pub fn image(&self) -> &'a SdrImage {
        self.image
    }

    pub fn mask(&self) -> &'a BinaryMask {
        self.mask
    }

    pub fn prompt(&self) -> &'a str {
        self.prompt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Checks a backend answer and pastes the request image back outside the
    /// mask, so unmasked pixels are bit-identical to the input.
    pub fn accept(&self, response: SdrImage) -> Result<SdrImage, BackendError> {
        check_dimensions(self.image.dimensions(), response.dimensions())?;
        let (w, h) = self.image.dimensions();
        let data = response
            .into_pixels()
            .into_iter()
            .zip(self.image.pixels())
            .zip(self.mask.bits())
            .map(|((out, inp), &fill)| if fill { out } else { *inp })
            .collect();
        Ok(SdrImage::from_valid(w, h, data))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SegmentRequest<'a> {
    image: &'a SdrImage,
}

impl<'a> SegmentRequest<'a> {
    pub fn new(image: &'a SdrImage) -> Self {
        SegmentRequest { image }
    }

    pub fn image(&self) -> &'a SdrImage {
        self.image
    }
}

/// A generative model service. Calls block until the result is available.
pub trait Backend {
    /// Returns an image of the request's size; masked pixels hold generated
    /// content in `[0, 1]`.
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<SdrImage, BackendError>;

    fn segment(&self, req: &SegmentRequest<'_>) -> Result<SemanticLabeling, BackendError>;

    fn name(&self) -> &str;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<SdrImage, BackendError> {
        (**self).inpaint(req)
    }

    fn segment(&self, req: &SegmentRequest<'_>) -> Result<SemanticLabeling, BackendError> {
        (**self).segment(req)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

pub(crate) fn check_dimensions(
    expected: (usize, usize),
    found: (usize, usize),
) -> Result<(), BackendError> {
    if expected == found {
        Ok(())
    } else {
        Err(BackendError::DimensionMismatch { expected, found })
    }
}

impl From<ImageError> for BackendError {
    fn from(e: ImageError) -> Self {
        BackendError::Malformed(e.to_string())
    }
}
