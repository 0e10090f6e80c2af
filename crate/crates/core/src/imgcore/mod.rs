//! Image containers, color math and file I/O.
//!
//! Two raster types are distinguished by value domain:
//! [`SdrImage`] holds display-referred values in `[0, 1]`, [`LinearImage`]
//! holds non-negative relative scene radiance. Converting between them is
//! always an explicit [`linearize`]/[`delinearize`] call.

mod color;
mod raster;
mod io;
mod rgbe;

use std::path::PathBuf;

pub use self::color::{delinearize, linearize, luminance, ResponseCurve, REC709};
pub use self::raster::{LinearImage, Rgb, SdrImage};
pub use self::io::{
    decode_gray8_png, decode_rgb_png, encode_gray8_png, encode_rgb_png, read_ldr, write_ldr_png,
};
pub use self::rgbe::{decode_hdr, encode_hdr, read_hdr, write_hdr};

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("invalid dimensions {width}x{height} for {len} pixels")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("channel value {value} at ({x}, {y}) outside [0, 1]")]
    OutOfRange { x: usize, y: usize, value: f32 },
    #[error("radiance at ({x}, {y}) is negative or not finite")]
    InvalidRadiance { x: usize, y: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid response curve: {0}")]
    InvalidCurve(String),
    #[error("cannot decode {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error("unsupported pixel format {format} in {path}; expected 8-bit PNG or JPEG")]
    UnsupportedBitDepth { path: PathBuf, format: String },
    #[error("malformed Radiance HDR data: {0}")]
    InvalidHdr(String),
    #[error("PNG codec: {0}")]
    Png(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ImageError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ImageError::Io {
            path: path.into(),
            source,
        }
    }
}
