//! Slanted-plane stereo with joint occlusion-boundary reasoning.
//!
//! Each superpixel of the reference image carries a continuous disparity
//! plane; each pair of neighboring superpixels carries a discrete boundary
//! label (coplanar, hinge, or occlusion in either direction). The hybrid
//! energy is minimized by particle convex belief propagation: planes are
//! resampled around the incumbent, the induced discrete problem is solved by
//! convergent dual message passing, and the incumbent is replaced only when
//! the true energy decreases.

pub mod harness;
pub mod imagery;
pub mod inference;
pub mod matching;
pub mod model;
pub mod segmentation;
