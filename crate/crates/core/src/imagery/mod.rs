//! Images, disparity maps, their on-disk containers, and the synthetic
//! piecewise-planar scene generator.

mod io;
mod pfm;
pub mod synthetic;

pub use io::{
    load_disparity, load_image, load_mask, save_disparity, save_image, save_label_map, save_mask,
    DisparityFormat, PNG16_MAX_DISPARITY,
};
pub use synthetic::{generate_synthetic, save_scene, SyntheticConfig, SyntheticScene};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("corrupt data: {0}")]
    Corrupt(String),
    #[error("format mismatch: {0}")]
    FormatMismatch(String),
    #[error("dimension overflow: {width}x{height}")]
    DimensionOverflow { width: u64, height: u64 },
    #[error("disparity {value} at ({u}, {v}) is not representable in png16")]
    OutOfRange { value: f32, u: usize, v: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("infeasible synthetic configuration: {0}")]
    InfeasibleConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// 8-bit raster, row-major, channels interleaved. Three-channel images are
/// stored in R, G, B order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidDimensions(format!("{width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::InvalidDimensions(format!(
                "{channels} channels"
            )));
        }
        if data.len() != width * height * channels {
            return Err(ImageError::InvalidDimensions(format!(
                "data length {} != {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(
        width: usize,
        height: usize,
        channels: usize,
        value: u8,
    ) -> Result<Self, ImageError> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// RGB triple at (u, v); grayscale is replicated.
    #[inline]
    pub fn rgb(&self, u: usize, v: usize) -> [u8; 3] {
        let i = (v * self.width + u) * self.channels;
        if self.channels == 3 {
            [self.data[i], self.data[i + 1], self.data[i + 2]]
        } else {
            let g = self.data[i];
            [g, g, g]
        }
    }

    /// Luma (ITU-R BT.601 weights) at (u, v).
    #[inline]
    pub fn gray(&self, u: usize, v: usize) -> u8 {
        let i = (v * self.width + u) * self.channels;
        if self.channels == 1 {
            self.data[i]
        } else {
            let (r, g, b) = (
                self.data[i] as u32,
                self.data[i + 1] as u32,
                self.data[i + 2] as u32,
            );
            ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
        }
    }

    pub fn to_gray(&self) -> Image {
        let mut data = Vec::with_capacity(self.pixel_count());
        for v in 0..self.height {
            for u in 0..self.width {
                data.push(self.gray(u, v));
            }
        }
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

/// Dense disparity raster with an explicit validity flag per pixel.
///
/// Invalid pixels are `None`; valid values are finite and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityImage {
    width: usize,
    height: usize,
    values: Vec<Option<f32>>,
}

impl DisparityImage {
    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![None; width * height],
        }
    }

    pub fn from_values(
        width: usize,
        height: usize,
        values: Vec<Option<f32>>,
    ) -> Result<Self, ImageError> {
        if values.len() != width * height {
            return Err(ImageError::InvalidDimensions(format!(
                "{} values for {width}x{height}",
                values.len()
            )));
        }
        if let Some(bad) = values
            .iter()
            .flatten()
            .find(|d| !d.is_finite() || **d < 0.0)
        {
            return Err(ImageError::Corrupt(format!(
                "invalid disparity value {bad}"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<f32> {
        self.values[v * self.width + u]
    }

    /// Sets a pixel; negative or non-finite values are rejected as invalid.
    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: Option<f32>) {
        self.values[v * self.width + u] = value.filter(|d| d.is_finite() && *d >= 0.0);
    }

    pub fn values(&self) -> &[Option<f32>] {
        &self.values
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|d| d.is_some()).count()
    }

    /// Iterator over `(u, v, disparity)` for every valid pixel, row-major.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, usize, f32)> + '_ {
        let w = self.width;
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(i, d)| d.map(|d| (i % w, i / w, d)))
    }
}

/// Per-pixel visibility classification of a ground-truth map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    NonOccluded,
    Occluded,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub disparity: DisparityImage,
    pub mask: Vec<Visibility>,
}

impl GroundTruth {
    pub fn new(disparity: DisparityImage, mask: Vec<Visibility>) -> Result<Self, ImageError> {
        if mask.len() != disparity.width() * disparity.height() {
            return Err(ImageError::InvalidDimensions(
                "mask does not match disparity".into(),
            ));
        }
        for (i, m) in mask.iter().enumerate() {
            if *m != Visibility::Unknown && disparity.values()[i].is_none() {
                return Err(ImageError::Corrupt(format!(
                    "pixel {i} is labeled visible/occluded but has no ground-truth disparity"
                )));
            }
        }
        Ok(Self { disparity, mask })
    }

    /// Ground truth where every valid pixel is non-occluded and invalid ones unknown.
    pub fn without_mask(disparity: DisparityImage) -> Self {
        let mask = disparity
            .values()
            .iter()
            .map(|d| {
                if d.is_some() {
                    Visibility::NonOccluded
                } else {
                    Visibility::Unknown
                }
            })
            .collect();
        Self { disparity, mask }
    }

    pub fn width(&self) -> usize {
        self.disparity.width()
    }

    pub fn height(&self) -> usize {
        self.disparity.height()
    }
}
