use serde::{Deserialize, Serialize};

use super::gap::for_each_in_box;
use super::{GripperGeometry, HandleHypothesis};
use crate::frame::Frame;
use crate::geometry::Vec3;
use crate::raster::Grid;

/// Approach volume in front of a handle, in its local `(a, f, n)` frame:
/// `|a| ≤ r + margin`, `|f| ≤ w/2 + margin`, `margin < n ≤ l + margin`.
/// Positive n points from the surface toward the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prism {
    pub half_a: f64,
    pub half_f: f64,
    pub n_lo: f64,
    pub n_hi: f64,
}

impl Prism {
    pub fn new(h: &HandleHypothesis, gripper: &GripperGeometry, margin: f64) -> Self {
        Self {
            half_a: h.r + margin,
            half_f: gripper.w / 2.0 + margin,
            n_lo: margin,
            n_hi: gripper.l + margin,
        }
    }

    /// Containment test on local coordinates.
    #[inline]
    pub fn contains_local(&self, l: &Vec3) -> bool {
        l.x.abs() <= self.half_a && l.y.abs() <= self.half_f && l.z > self.n_lo && l.z <= self.n_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcclusionCheck {
    pub pass: bool,
    /// Foreign points found inside the prism.
    pub intruders: usize,
}

/// Passes iff no valid point outside the handle's own segment lies in the
/// approach prism.
pub fn occlusion_filter(
    frame: &Frame,
    labels: &Grid<Option<u32>>,
    h: &HandleHypothesis,
    gripper: &GripperGeometry,
    margin: f64,
) -> OcclusionCheck {
    let prism = Prism::new(h, gripper, margin);
    let own = Some(h.id.segment_id as u32);
    let bounds = [
        (-prism.half_a, prism.half_a),
        (-prism.half_f, prism.half_f),
        (prism.n_lo, prism.n_hi),
    ];
    let mut intruders = 0;
    for_each_in_box(frame, &h.c, &h.frame(), bounds, |p, _, l| {
        if labels[p] != own && prism.contains_local(l) {
            intruders += 1;
        }
    });
    OcclusionCheck {
        pass: intruders == 0,
        intruders,
    }
}
