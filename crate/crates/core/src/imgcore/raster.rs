use super::ImageError;

/// One RGB pixel.
pub type Rgb = [f32; 3];

macro_rules! raster_common {
    ($ty:ident) => {
        impl $ty {
            pub fn width(&self) -> usize {
                self.width
            }

            pub fn height(&self) -> usize {
                self.height
            }

            pub fn dimensions(&self) -> (usize, usize) {
                (self.width, self.height)
            }

            /// Number of pixels.
            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            /// Row-major pixel slice; pixel `(x, y)` lives at `y * width + x`.
            pub fn pixels(&self) -> &[Rgb] {
                &self.data
            }

            pub fn get(&self, x: usize, y: usize) -> Rgb {
                self.data[y * self.width + x]
            }

            pub fn into_pixels(self) -> Vec<Rgb> {
                self.data
            }

            pub(crate) fn check_dims(width: usize, height: usize, len: usize) -> Result<(), ImageError> {
                if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
                    return Err(ImageError::InvalidDimensions { width, height, len });
                }
                Ok(())
            }

            pub fn ensure_same_size(&self, other: (usize, usize)) -> Result<(), ImageError> {
                if self.dimensions() != other {
                    return Err(ImageError::DimensionMismatch {
                        expected: self.dimensions(),
                        found: other,
                    });
                }
                Ok(())
            }
        }
    };
}

/// Display-referred RGB raster with every channel in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrImage {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

raster_common!(SdrImage);

impl SdrImage {
    pub fn new(width: usize, height: usize, data: Vec<Rgb>) -> Result<Self, ImageError> {
        Self::check_dims(width, height, data.len())?;
        for (i, px) in data.iter().enumerate() {
            for &c in px {
                if !(0.0..=1.0).contains(&c) {
                    return Err(ImageError::OutOfRange {
                        x: i % width,
                        y: i / width,
                        value: c,
                    });
                }
            }
        }
        Ok(SdrImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: Rgb) -> Result<Self, ImageError> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Rgb,
    ) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Decodes interleaved 8-bit RGB as `v / 255`.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, ImageError> {
        if bytes.len() != width * height * 3 {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: bytes.len() / 3,
            });
        }
        let data = bytes
            .chunks_exact(3)
            .map(|c| [c[0] as f32 / 255.0, c[1] as f32 / 255.0, c[2] as f32 / 255.0])
            .collect();
        Self::new(width, height, data)
    }

    /// Quantizes to interleaved 8-bit RGB with round-to-nearest.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .flat_map(|px| px.map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8))
            .collect()
    }
}

/// Scene-referred RGB raster: non-negative, finite relative radiance.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

raster_common!(LinearImage);

impl LinearImage {
    pub fn new(width: usize, height: usize, data: Vec<Rgb>) -> Result<Self, ImageError> {
        Self::check_dims(width, height, data.len())?;
        for (i, px) in data.iter().enumerate() {
            if px.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(ImageError::InvalidRadiance {
                    x: i % width,
                    y: i / width,
                });
            }
        }
        Ok(LinearImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: Rgb) -> Result<Self, ImageError> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Rgb,
    ) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Builds an image from pixels already known to be valid.
    pub(crate) fn from_valid(width: usize, height: usize, data: Vec<Rgb>) -> Self {
        debug_assert!(data
            .iter()
            .all(|px| px.iter().all(|c| c.is_finite() && *c >= 0.0)));
        debug_assert_eq!(width * height, data.len());
        LinearImage {
            width,
            height,
            data,
        }
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.data
    }

    /// Clamps every channel into `[0, 1]`.
    pub fn clamped(&self) -> LinearImage {
        let data = self.data.iter().map(|px| px.map(|c| c.min(1.0))).collect();
        LinearImage::from_valid(self.width, self.height, data)
    }
}

impl SdrImage {
    pub(crate) fn from_valid(width: usize, height: usize, data: Vec<Rgb>) -> Self {
        debug_assert!(data
            .iter()
            .all(|px| px.iter().all(|c| (0.0..=1.0).contains(c))));
        SdrImage {
            width,
            height,
            data,
        }
    }
}
