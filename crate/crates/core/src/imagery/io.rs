use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageReader, Luma};

use super::{pfm, DisparityImage, Image, ImageError, Visibility};

/// On-disk disparity containers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisparityFormat {
    /// 16-bit single-channel PNG, stored value / 256, 0 = invalid.
    Png16,
    /// Portable float map, non-positive or non-finite = invalid.
    Pfm,
}

impl DisparityFormat {
    /// Guess from the file extension (`.pfm` → Pfm, anything else → Png16).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("pfm") => DisparityFormat::Pfm,
            _ => DisparityFormat::Png16,
        }
    }
}

/// Largest disparity a png16 container can hold.
pub const PNG16_MAX_DISPARITY: f32 = 65535.0 / 256.0;

fn map_image_error(path: &Path, err: image::ImageError) -> ImageError {
    use image::ImageError as E;
    match err {
        E::IoError(io) if io.kind() == std::io::ErrorKind::NotFound => {
            ImageError::NotFound(path.display().to_string())
        }
        E::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            ImageError::Corrupt(format!("{}: {io}", path.display()))
        }
        E::IoError(io) => ImageError::Io(io),
        E::Unsupported(e) => ImageError::Unsupported(format!("{}: {e}", path.display())),
        E::Limits(e) => ImageError::Unsupported(format!("{}: {e}", path.display())),
        other => ImageError::Corrupt(format!("{}: {other}", path.display())),
    }
}

fn decode(path: &Path) -> Result<DynamicImage, ImageError> {
    if !path.exists() {
        return Err(ImageError::NotFound(path.display().to_string()));
    }
    let reader = ImageReader::open(path)
        .map_err(|e| map_image_error(path, e.into()))?
        .with_guessed_format()
        .map_err(|e| map_image_error(path, e.into()))?;
    if reader.format().is_none() {
        return Err(ImageError::Unsupported(format!(
            "{}: unknown raster format",
            path.display()
        )));
    }
    reader.decode().map_err(|e| map_image_error(path, e))
}

/// Loads an 8-bit grayscale or RGB raster (PNG, PGM, PPM). Alpha is dropped;
/// 16-bit and float rasters are rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let path = path.as_ref();
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Image::new(w, h, 1, buf.into_raw()),
        DynamicImage::ImageLumaA8(_) => Image::new(w, h, 1, img.to_luma8().into_raw()),
        DynamicImage::ImageRgb8(buf) => Image::new(w, h, 3, buf.into_raw()),
        DynamicImage::ImageRgba8(_) => Image::new(w, h, 3, img.to_rgb8().into_raw()),
        other => Err(ImageError::Unsupported(format!(
            "{}: {:?} is not an 8-bit gray/RGB raster",
            path.display(),
            other.color()
        ))),
    }
}

/// Writes an image as PNG (or PGM/PPM, picked by extension).
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let dynamic = if img.channels() == 1 {
        DynamicImage::ImageLuma8(
            ImageBuffer::from_raw(w, h, img.data().to_vec()).expect("buffer size checked by Image"),
        )
    } else {
        DynamicImage::ImageRgb8(
            ImageBuffer::from_raw(w, h, img.data().to_vec()).expect("buffer size checked by Image"),
        )
    };
    dynamic.save(path).map_err(|e| map_image_error(path, e))
}

pub fn load_disparity(
    path: impl AsRef<Path>,
    format: DisparityFormat,
) -> Result<DisparityImage, ImageError> {
    let path = path.as_ref();
    match format {
        DisparityFormat::Pfm => {
            let bytes = std::fs::read(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => ImageError::NotFound(path.display().to_string()),
                _ => ImageError::Io(e),
            })?;
            pfm::decode(&bytes)
        }
        DisparityFormat::Png16 => {
            let img = decode(path)?;
            let DynamicImage::ImageLuma16(buf) = img else {
                return Err(ImageError::FormatMismatch(format!(
                    "{}: expected 16-bit single-channel PNG, found {:?}",
                    path.display(),
                    img.color()
                )));
            };
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let values = buf
                .into_raw()
                .into_iter()
                .map(|code| (code != 0).then(|| code as f32 / 256.0))
                .collect();
            DisparityImage::from_values(w, h, values)
        }
    }
}

fn png16_code(value: f32, u: usize, v: usize) -> Result<u16, ImageError> {
    let scaled = (value as f64 * 256.0).round();
    if scaled > 65535.0 {
        return Err(ImageError::OutOfRange { value, u, v });
    }
    // 0 is reserved for invalid pixels
    Ok(scaled.max(1.0) as u16)
}

pub fn save_disparity(
    d: &DisparityImage,
    path: impl AsRef<Path>,
    format: DisparityFormat,
) -> Result<(), ImageError> {
    let path = path.as_ref();
    match format {
        DisparityFormat::Pfm => {
            std::fs::write(path, pfm::encode(d))?;
            Ok(())
        }
        DisparityFormat::Png16 => {
            let mut raw = Vec::with_capacity(d.width() * d.height());
            for (i, value) in d.values().iter().enumerate() {
                raw.push(match value {
                    Some(x) => png16_code(*x, i % d.width(), i / d.width())?,
                    None => 0,
                });
            }
            let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
                ImageBuffer::from_raw(d.width() as u32, d.height() as u32, raw)
                    .expect("sized above");
            DynamicImage::ImageLuma16(buf)
                .save(path)
                .map_err(|e| map_image_error(path, e))
        }
    }
}

const MASK_NON_OCCLUDED: u8 = 255;
const MASK_OCCLUDED: u8 = 128;
const MASK_UNKNOWN: u8 = 0;

/// Writes a visibility mask as 8-bit PNG: 255 non-occluded, 128 occluded, 0 unknown.
pub fn save_mask(
    mask: &[Visibility],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<(), ImageError> {
    let data = mask
        .iter()
        .map(|m| match m {
            Visibility::NonOccluded => MASK_NON_OCCLUDED,
            Visibility::Occluded => MASK_OCCLUDED,
            Visibility::Unknown => MASK_UNKNOWN,
        })
        .collect();
    save_image(&Image::new(width, height, 1, data)?, path)
}

/// Reads a mask written by [`save_mask`]. Values ≥ 192 are non-occluded,
/// 64..192 occluded, below 64 unknown.
pub fn load_mask(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<Visibility>), ImageError> {
    let img = load_image(path)?.to_gray();
    let mask = img
        .data()
        .iter()
        .map(|&g| match g {
            192..=255 => Visibility::NonOccluded,
            64..=191 => Visibility::Occluded,
            _ => Visibility::Unknown,
        })
        .collect();
    Ok((img.width(), img.height(), mask))
}

/// Writes a segment/region label map as a 16-bit PNG.
pub fn save_label_map(
    labels: &[usize],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<(), ImageError> {
    let path = path.as_ref();
    let raw: Vec<u16> = labels
        .iter()
        .map(|&l| l.min(u16::MAX as usize) as u16)
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width as u32, height as u32, raw)
            .ok_or_else(|| ImageError::InvalidDimensions("label map size".into()))?;
    DynamicImage::ImageLuma16(buf)
        .save(path)
        .map_err(|e| map_image_error(path, e))
}
