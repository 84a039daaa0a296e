//! Feasibility of boundary-label combinations at 3- and 4-way junctions.
//!
//! Junction tables work on labels relative to the traversal order of the
//! junction: boundary `k` separates `segments[k]` and `segments[k + 1]`, and
//! `Fwd` means `segments[k]` occludes `segments[k + 1]`.

use std::sync::OnceLock;

use super::BoundaryLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JunctionLabel {
    Co,
    Hi,
    /// The earlier segment in traversal order is in front.
    Fwd,
    /// The later segment in traversal order is in front.
    Bwd,
}

impl JunctionLabel {
    pub const ALL: [JunctionLabel; 4] = [Self::Co, Self::Hi, Self::Fwd, Self::Bwd];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// Converts a stored pair label of `(i, j)`, `i < j`, to the junction
    /// frame. `flipped` is true when the traversal meets `j` before `i`.
    pub fn from_pair(o: BoundaryLabel, flipped: bool) -> Self {
        match (o, flipped) {
            (BoundaryLabel::Co, _) => Self::Co,
            (BoundaryLabel::Hi, _) => Self::Hi,
            (BoundaryLabel::Lo, false) | (BoundaryLabel::Ro, true) => Self::Fwd,
            (BoundaryLabel::Lo, true) | (BoundaryLabel::Ro, false) => Self::Bwd,
        }
    }
}

use JunctionLabel::{Bwd as B, Co as C, Fwd as F, Hi as H};

/// Base patterns of the impossible 3-way configurations; each stands for all
/// its cyclic rotations.
pub const IMPOSSIBLE3_BASE: [(char, [JunctionLabel; 3]); 13] = [
    // (a) three occlusions in a cycle
    ('a', [F, F, F]),
    ('a', [B, B, B]),
    // (b) hinge and two occlusions whose shared segment is front on one, back on the other
    ('b', [H, F, F]),
    ('b', [H, B, B]),
    // (c) the same with a coplanar boundary
    ('c', [C, F, F]),
    ('c', [C, B, B]),
    // (d) two hinges and an occlusion
    ('d', [H, H, F]),
    ('d', [H, H, B]),
    // (e) two coplanar boundaries and an occlusion
    ('e', [C, C, F]),
    ('e', [C, C, B]),
    // (f) two coplanar boundaries and a hinge
    ('f', [C, C, H]),
    // (g) hinge, coplanar, occlusion with the occluder on the coplanar side
    ('g', [C, H, B]),
    ('g', [H, C, F]),
];

fn index3(l: [JunctionLabel; 3]) -> usize {
    l[0].index() * 16 + l[1].index() * 4 + l[2].index()
}

fn index4(l: [JunctionLabel; 4]) -> usize {
    l[0].index() * 64 + l[1].index() * 16 + l[2].index() * 4 + l[3].index()
}

/// `true` for every impossible configuration, indexed `16 a + 4 b + c`.
pub fn impossible3_table() -> &'static [bool; 64] {
    static TABLE: OnceLock<[bool; 64]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [false; 64];
        for (_, base) in IMPOSSIBLE3_BASE {
            for r in 0..3 {
                t[index3([base[r], base[(r + 1) % 3], base[(r + 2) % 3]])] = true;
            }
        }
        t
    })
}

/// Valid 4-way configurations around the cycle TL, TR, BR, BL: all
/// coplanar, or one opposite pair coplanar and the other pair both hinges or
/// both occlusions with the same side in front. Opposite boundaries are
/// traversed in opposite directions, so a consistent occlusion reads as one
/// `Fwd` and one `Bwd`.
pub const VALID4: [[JunctionLabel; 4]; 7] = [
    [C, C, C, C],
    [C, H, C, H],
    [C, F, C, B],
    [C, B, C, F],
    [H, C, H, C],
    [F, C, B, C],
    [B, C, F, C],
];

/// `true` for every valid configuration, indexed `64 a + 16 b + 4 c + d`.
pub fn valid4_table() -> &'static [bool; 256] {
    static TABLE: OnceLock<[bool; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [false; 256];
        for l in VALID4 {
            t[index4(l)] = true;
        }
        t
    })
}

/// `lambda_imp` for an impossible configuration, else 0.
pub fn phi_junction3(labels: [JunctionLabel; 3], lambda_imp: f64) -> f64 {
    if impossible3_table()[index3(labels)] {
        lambda_imp
    } else {
        0.0
    }
}

/// 0 for a valid configuration, else `lambda_imp`.
pub fn phi_junction4(labels: [JunctionLabel; 4], lambda_imp: f64) -> f64 {
    if valid4_table()[index4(labels)] {
        0.0
    } else {
        lambda_imp
    }
}
