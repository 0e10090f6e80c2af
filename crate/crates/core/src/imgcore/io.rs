use std::io::Cursor;
use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat, ImageReader};

use super::{ImageError, SdrImage};

/// Reads an 8-bit PNG or baseline JPEG as display-referred values `v / 255`.
///
/// No linearization happens here; alpha is discarded.
pub fn read_ldr(path: impl AsRef<Path>) -> Result<SdrImage, ImageError> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| ImageError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| ImageError::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        other => {
            return Err(ImageError::Unreadable {
                path: path.to_path_buf(),
                message: format!("unsupported container {other:?}"),
            })
        }
    }
    let decoded = reader.decode().map_err(|e| ImageError::Unreadable {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    dynamic_to_sdr(decoded).map_err(|format| ImageError::UnsupportedBitDepth {
        path: path.to_path_buf(),
        format,
    })
}

fn dynamic_to_sdr(img: DynamicImage) -> Result<SdrImage, String> {
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => {}
        other => return Err(format!("{other:?}")),
    }
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    SdrImage::from_rgb8(w, h, rgb.as_raw()).map_err(|e| e.to_string())
}

/// Writes an 8-bit RGB PNG.
pub fn write_ldr_png(img: &SdrImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let bytes = encode_rgb_png(img)?;
    std::fs::write(path, bytes).map_err(|e| ImageError::io(path, e))
}

pub fn encode_rgb_png(img: &SdrImage) -> Result<Vec<u8>, ImageError> {
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_rgb8())
        .ok_or_else(|| ImageError::Png("buffer size mismatch".into()))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| ImageError::Png(e.to_string()))?;
    Ok(out.into_inner())
}

/// Decodes PNG bytes; any 8-bit layout is accepted and expanded to RGB.
pub fn decode_rgb_png(bytes: &[u8]) -> Result<SdrImage, ImageError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| ImageError::Png(e.to_string()))?;
    dynamic_to_sdr(img).map_err(|f| ImageError::Png(format!("unsupported pixel format {f}")))
}

pub fn encode_gray8_png(width: usize, height: usize, values: &[u8]) -> Result<Vec<u8>, ImageError> {
    let buf = image::GrayImage::from_raw(width as u32, height as u32, values.to_vec())
        .ok_or_else(|| ImageError::Png("buffer size mismatch".into()))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| ImageError::Png(e.to_string()))?;
    Ok(out.into_inner())
}

/// Decodes a single-channel 8-bit PNG, returning `(width, height, values)`.
pub fn decode_gray8_png(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), ImageError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| ImageError::Png(e.to_string()))?;
    match img.color() {
        ColorType::L8 => {}
        other => {
            return Err(ImageError::Png(format!(
                "expected 8-bit grayscale, found {other:?}"
            )))
        }
    }
    let gray = img.into_luma8();
    Ok((gray.width() as usize, gray.height() as usize, gray.into_raw()))
}
