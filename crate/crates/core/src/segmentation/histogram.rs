use super::SegmentationError;
use crate::imagery::Image;

/// 4x4x4 uniform RGB quantization.
pub const HISTOGRAM_BINS: usize = 64;

/// Normalized color histogram of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram {
    pub bins: [f64; HISTOGRAM_BINS],
}

impl ColorHistogram {
    #[inline]
    pub fn bin_of(rgb: [u8; 3]) -> usize {
        ((rgb[0] >> 6) as usize) * 16 + ((rgb[1] >> 6) as usize) * 4 + (rgb[2] >> 6) as usize
    }

    /// χ² distance `½ Σ (h - g)² / (h + g)`, skipping bins empty in both.
    /// Lies in [0, 1] for normalized histograms.
    pub fn chi_squared(&self, other: &ColorHistogram) -> f64 {
        let mut acc = 0.0;
        for (h, g) in self.bins.iter().zip(other.bins.iter()) {
            let s = h + g;
            if s > 0.0 {
                let d = h - g;
                acc += d * d / s;
            }
        }
        0.5 * acc
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Histograms of every segment in `labels` (ids `0..n`). Grayscale images
/// are treated as R = G = B.
pub fn color_histograms(
    image: &Image,
    labels: &[usize],
    n: usize,
) -> Result<Vec<ColorHistogram>, SegmentationError> {
    if labels.len() != image.pixel_count() {
        return Err(SegmentationError::DimensionMismatch(
            "label map does not match image".into(),
        ));
    }
    let mut counts = vec![[0u64; HISTOGRAM_BINS]; n];
    let w = image.width();
    for (i, &l) in labels.iter().enumerate() {
        if l >= n {
            return Err(SegmentationError::InvalidLabels(format!(
                "label {l} >= {n}"
            )));
        }
        counts[l][ColorHistogram::bin_of(image.rgb(i % w, i / w))] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| {
            let area: u64 = c.iter().sum();
            let mut bins = [0.0; HISTOGRAM_BINS];
            if area > 0 {
                for (b, &k) in bins.iter_mut().zip(c.iter()) {
                    *b = k as f64 / area as f64;
                }
            }
            ColorHistogram { bins }
        })
        .collect())
}
