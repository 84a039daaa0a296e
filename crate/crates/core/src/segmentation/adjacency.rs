use std::collections::{BTreeMap, HashSet};

use super::{BoundaryOrientation, Junction3, Junction4, NeighborPair};

/// Neighborhood structure extracted from a label map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Adjacency {
    /// Sorted by `(i, j)`.
    pub pairs: Vec<NeighborPair>,
    pub junctions3: Vec<Junction3>,
    pub junctions4: Vec<Junction4>,
}

/// One 4-adjacency between differently labelled pixels: the left/top pixel
/// and whether the neighbor is to the right (`true`) or below.
type Interface = (usize, usize, bool);

/// Pairs, bands and junction sites of a label map.
///
/// The band of a pair holds every pixel within Chebyshev distance 2 of the
/// midpoint of one of its pixel adjacencies. For a horizontal neighbor
/// `(u, v)-(u+1, v)` that is columns `u-1..=u+2` and rows `v-2..=v+2`.
///
/// Junctions come from 2x2 windows. Four distinct labels give a 4-way
/// junction; three distinct labels give a 3-way junction when the repeated
/// label occupies two side-by-side cells (a diagonal repeat leaves two
/// labels touching only at a corner). Each distinct segment set is reported
/// once, at its first window in raster order.
pub fn build_adjacency(labels: &[usize], width: usize, height: usize) -> Adjacency {
    assert_eq!(labels.len(), width * height, "label map size");
    let at = |u: usize, v: usize| labels[v * width + u];

    let mut interfaces: BTreeMap<(usize, usize), Vec<Interface>> = BTreeMap::new();
    for v in 0..height {
        for u in 0..width {
            let a = at(u, v);
            if u + 1 < width {
                let b = at(u + 1, v);
                if a != b {
                    interfaces
                        .entry((a.min(b), a.max(b)))
                        .or_default()
                        .push((u, v, true));
                }
            }
            if v + 1 < height {
                let b = at(u, v + 1);
                if a != b {
                    interfaces
                        .entry((a.min(b), a.max(b)))
                        .or_default()
                        .push((u, v, false));
                }
            }
        }
    }

    let mut stamp = vec![usize::MAX; width * height];
    let mut pairs = Vec::with_capacity(interfaces.len());
    for (k, (&(i, j), list)) in interfaces.iter().enumerate() {
        let mut band = Vec::new();
        for &(u, v, horizontal) in list {
            let (du, dv) = if horizontal {
                ((1, 2), (2, 2))
            } else {
                ((2, 2), (1, 2))
            };
            let u0 = u.saturating_sub(du.0);
            let u1 = (u + du.1).min(width - 1);
            let v0 = v.saturating_sub(dv.0);
            let v1 = (v + dv.1).min(height - 1);
            for y in v0..=v1 {
                for x in u0..=u1 {
                    let idx = y * width + x;
                    if stamp[idx] != k {
                        stamp[idx] = k;
                        band.push((x, y));
                    }
                }
            }
        }
        band.sort_unstable_by_key(|&(x, y)| (y, x));
        pairs.push(NeighborPair {
            i,
            j,
            band,
            boundary_length: list.len(),
        });
    }

    let index: BTreeMap<(usize, usize), usize> = pairs
        .iter()
        .enumerate()
        .map(|(k, p)| ((p.i, p.j), k))
        .collect();
    let pair_of = |a: usize, b: usize| index[&(a.min(b), a.max(b))];

    let mut junctions3 = Vec::new();
    let mut junctions4 = Vec::new();
    let mut seen3: HashSet<[usize; 3]> = HashSet::new();
    let mut seen4: HashSet<[usize; 4]> = HashSet::new();
    for v in 0..height.saturating_sub(1) {
        for u in 0..width.saturating_sub(1) {
            // clockwise on screen: TL, TR, BR, BL
            let w = [at(u, v), at(u + 1, v), at(u + 1, v + 1), at(u, v + 1)];
            let distinct = {
                let mut s = w;
                s.sort_unstable();
                s.windows(2).filter(|p| p[0] != p[1]).count() + 1
            };
            match distinct {
                4 => {
                    let mut key = w;
                    key.sort_unstable();
                    if seen4.insert(key) {
                        use BoundaryOrientation::{Horizontal, Vertical};
                        junctions4.push(Junction4 {
                            segments: w,
                            pairs: std::array::from_fn(|k| pair_of(w[k], w[(k + 1) % 4])),
                            orientations: [Vertical, Horizontal, Vertical, Horizontal],
                        });
                    }
                }
                3 => {
                    let Some(dup) = (0..4).find(|&k| w[k] == w[(k + 1) % 4]) else {
                        continue;
                    };
                    let segments = [w[(dup + 1) % 4], w[(dup + 2) % 4], w[(dup + 3) % 4]];
                    let mut key = segments;
                    key.sort_unstable();
                    if seen3.insert(key) {
                        junctions3.push(Junction3 {
                            segments,
                            pairs: std::array::from_fn(|k| {
                                pair_of(segments[k], segments[(k + 1) % 3])
                            }),
                        });
                    }
                }
                _ => {}
            }
        }
    }

    Adjacency {
        pairs,
        junctions3,
        junctions4,
    }
}
