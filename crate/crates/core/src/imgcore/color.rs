use serde::{Deserialize, Serialize};

use super::{ImageError, LinearImage, Rgb, SdrImage};

/// Rec. 709 luminance weights.
pub const REC709: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Relative luminance of a linear RGB triple.
///
/// Evaluated in double precision so log-domain quantities derived from it stay
/// accurate well below single-precision epsilon.
pub fn luminance(rgb: Rgb) -> f64 {
    REC709[0] * rgb[0] as f64 + REC709[1] * rgb[1] as f64 + REC709[2] * rgb[2] as f64
}

/// Camera response model used to move between display and scene space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResponseCurve {
    Gamma { gamma: f32 },
    Srgb,
}

impl Default for ResponseCurve {
    fn default() -> Self {
        ResponseCurve::Gamma { gamma: 2.2 }
    }
}

impl ResponseCurve {
    pub fn validate(&self) -> Result<(), ImageError> {
        match *self {
            ResponseCurve::Gamma { gamma } if !(1.0..=4.0).contains(&gamma) => Err(
                ImageError::InvalidCurve(format!("gamma {gamma} outside [1, 4]")),
            ),
            _ => Ok(()),
        }
    }

    /// Display value to linear value.
    pub fn to_linear(&self, v: f32) -> f32 {
        let v = v as f64;
        let out = match *self {
            ResponseCurve::Gamma { gamma } => v.powf(gamma as f64),
            ResponseCurve::Srgb => {
                if v <= 0.04045 {
                    v / 12.92
                } else {
                    ((v + 0.055) / 1.055).powf(2.4)
                }
            }
        };
        out as f32
    }

    /// Linear value to display value; inverse of [`Self::to_linear`] on `[0, 1]`.
    pub fn to_display(&self, v: f32) -> f32 {
        let v = v as f64;
        let out = match *self {
            ResponseCurve::Gamma { gamma } => v.powf(1.0 / gamma as f64),
            ResponseCurve::Srgb => {
                if v <= 0.0031308 {
                    v * 12.92
                } else {
                    1.055 * v.powf(1.0 / 2.4) - 0.055
                }
            }
        };
        (out as f32).clamp(0.0, 1.0)
    }
}

pub fn linearize(img: &SdrImage, crf: ResponseCurve) -> LinearImage {
    let data = img
        .pixels()
        .iter()
        .map(|px| px.map(|c| crf.to_linear(c)))
        .collect();
    LinearImage::from_valid(img.width(), img.height(), data)
}

/// Inverse of [`linearize`]. Channels must already lie in `[0, 1]`.
pub fn delinearize(img: &LinearImage, crf: ResponseCurve) -> Result<SdrImage, ImageError> {
    let w = img.width();
    let mut data = Vec::with_capacity(img.len());
    for (i, px) in img.pixels().iter().enumerate() {
        for &c in px {
            if c > 1.0 {
                return Err(ImageError::OutOfRange {
                    x: i % w,
                    y: i / w,
                    value: c,
                });
            }
        }
        data.push(px.map(|c| crf.to_display(c)));
    }
    Ok(SdrImage::from_valid(w, img.height(), data))
}
