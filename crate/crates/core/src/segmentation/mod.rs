//! Superpixels of the reference image and the neighborhood structure the
//! model is built on: neighbor pairs with their boundary bands, 3- and 4-way
//! junction sites, and per-segment color histograms.

mod adjacency;
mod histogram;
mod slic;

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

pub use adjacency::{build_adjacency, Adjacency};
pub use histogram::{color_histograms, ColorHistogram, HISTOGRAM_BINS};
pub use slic::{slic, SlicParams};

use crate::imagery::Image;

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("requested {requested} segments but the image has only {pixels} pixels")]
    TooManySegments { requested: usize, pixels: usize },
    #[error("invalid label map: {0}")]
    InvalidLabels(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: usize,
    /// Pixel coordinates `(u, v)` in raster order.
    pub pixels: Vec<(usize, usize)>,
    /// Mean pixel coordinate.
    pub center: (f64, f64),
    pub histogram: ColorHistogram,
}

/// Which way a boundary line runs inside a 2x2 junction window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryOrientation {
    /// Label change across rows.
    Horizontal,
    /// Label change across columns.
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborPair {
    /// Smaller segment id.
    pub i: usize,
    /// Larger segment id.
    pub j: usize,
    /// Pixels within Chebyshev distance 2 of the i|j interface, raster order.
    pub band: Vec<(usize, usize)>,
    /// Number of 4-adjacent pixel pairs straddling i|j.
    pub boundary_length: usize,
}

/// Three segments meeting at a point, listed in traversal order around the
/// junction; `pairs[k]` joins `segments[k]` and `segments[(k + 1) % 3]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Junction3 {
    pub segments: [usize; 3],
    pub pairs: [usize; 3],
}

/// Four segments around a 2x2 window (top-left, top-right, bottom-right,
/// bottom-left); `pairs[k]` joins `segments[k]` and `segments[(k + 1) % 4]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Junction4 {
    pub segments: [usize; 4],
    pub pairs: [usize; 4],
    pub orientations: [BoundaryOrientation; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    pub segments: Vec<Segment>,
    pub pairs: Vec<NeighborPair>,
    pub junctions3: Vec<Junction3>,
    pub junctions4: Vec<Junction4>,
    pair_index: HashMap<(usize, usize), usize>,
}

impl Segmentation {
    /// Builds the full structure from a label map. Ids must be dense
    /// `0..n` and every segment 4-connected.
    pub fn from_labels(labels: Vec<usize>, image: &Image) -> Result<Self, SegmentationError> {
        let (width, height) = (image.width(), image.height());
        if labels.len() != width * height {
            return Err(SegmentationError::DimensionMismatch(format!(
                "{} labels for a {width}x{height} image",
                labels.len()
            )));
        }
        let n = labels.iter().max().map_or(0, |m| m + 1);
        let mut pixels: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, &l) in labels.iter().enumerate() {
            pixels[l].push((i % width, i / width));
        }
        if let Some(empty) = pixels.iter().position(|p| p.is_empty()) {
            return Err(SegmentationError::InvalidLabels(format!(
                "segment id {empty} has no pixels"
            )));
        }
        let components = connected_components(&labels, width, height);
        let n_components = components.iter().max().map_or(0, |m| m + 1);
        if n_components != n {
            return Err(SegmentationError::InvalidLabels(format!(
                "{n} segment ids but {n_components} connected components"
            )));
        }
        let histograms = color_histograms(image, &labels, n)?;
        let segments = pixels
            .into_iter()
            .zip(histograms)
            .enumerate()
            .map(|(id, (pixels, histogram))| {
                let count = pixels.len() as f64;
                let (su, sv) = pixels
                    .iter()
                    .fold((0.0, 0.0), |(a, b), &(u, v)| (a + u as f64, b + v as f64));
                Segment {
                    id,
                    pixels,
                    center: (su / count, sv / count),
                    histogram,
                }
            })
            .collect();
        let Adjacency {
            pairs,
            junctions3,
            junctions4,
        } = build_adjacency(&labels, width, height);
        let pair_index = pairs
            .iter()
            .enumerate()
            .map(|(k, p)| ((p.i, p.j), k))
            .collect();
        Ok(Self {
            width,
            height,
            labels,
            segments,
            pairs,
            junctions3,
            junctions4,
            pair_index,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, u: usize, v: usize) -> usize {
        self.labels[v * self.width + u]
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Index of the pair joining `a` and `b`, in either order.
    pub fn pair_between(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Neighbor segment ids of every segment, ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.segments.len()];
        for p in &self.pairs {
            out[p.i].push(p.j);
            out[p.j].push(p.i);
        }
        for list in &mut out {
            list.sort_unstable();
        }
        out
    }

    /// Line-oriented dump: `pair i j boundary_length band_size`,
    /// `junction3 a b c`, `junction4 a b c d`.
    pub fn write_graph_text(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# segments {}", self.segments.len())?;
        for p in &self.pairs {
            writeln!(
                out,
                "pair {} {} {} {}",
                p.i,
                p.j,
                p.boundary_length,
                p.band.len()
            )?;
        }
        for j in &self.junctions3 {
            let [a, b, c] = j.segments;
            writeln!(out, "junction3 {a} {b} {c}")?;
        }
        for j in &self.junctions4 {
            let [a, b, c, d] = j.segments;
            writeln!(out, "junction4 {a} {b} {c} {d}")?;
        }
        Ok(())
    }
}

/// 4-connected components of equal labels, numbered densely in raster order
/// of their first pixel.
pub fn connected_components(labels: &[usize], width: usize, height: usize) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let mut comp = vec![UNSET; labels.len()];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..labels.len() {
        if comp[start] != UNSET {
            continue;
        }
        let l = labels[start];
        comp[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (u, v) = (i % width, i / width);
            let mut visit = |j: usize| {
                if comp[j] == UNSET && labels[j] == l {
                    comp[j] = next;
                    stack.push(j);
                }
            };
            if u > 0 {
                visit(i - 1);
            }
            if u + 1 < width {
                visit(i + 1);
            }
            if v > 0 {
                visit(i - width);
            }
            if v + 1 < height {
                visit(i + width);
            }
        }
        next += 1;
    }
    comp
}
