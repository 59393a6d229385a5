use serde::{Deserialize, Serialize};

use super::AxisChoice;
use crate::error::{Error, Result};
use crate::geometry::{axis_angle, Vec3};
use crate::segmentation::SegmentFeatures;

/// Right-handed orthonormal frame: surface normal `n`, closing axis `a`,
/// finger-width direction `f = n × a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxFrame {
    pub n: Vec3,
    pub a: Vec3,
    pub f: Vec3,
}

impl DarbouxFrame {
    /// Coordinates of `p` relative to `origin`, as `(a, f, n)`.
    #[inline]
    pub fn local(&self, origin: &Vec3, p: &Vec3) -> Vec3 {
        let d = p - origin;
        Vec3::new(d.dot(&self.a), d.dot(&self.f), d.dot(&self.n))
    }

    #[inline]
    pub fn world(&self, origin: &Vec3, a: f64, f: f64, n: f64) -> Vec3 {
        origin + self.a * a + self.f * f + self.n * n
    }
}

/// Smallest angle allowed between the candidate axis and the normal.
const MIN_AXIS_NORMAL_ANGLE_DEG: f64 = 5.0;

/// Frame from a normal and an approximate closing axis (Gram–Schmidt).
pub fn frame_from_axes(n: Vec3, axis: Vec3) -> Result<DarbouxFrame> {
    let n = n.normalize();
    if axis.norm() == 0.0 || axis_angle(&n, &axis) < MIN_AXIS_NORMAL_ANGLE_DEG.to_radians() {
        return Err(Error::DegenerateAxis);
    }
    let a = (axis - n * axis.dot(&n)).normalize();
    let f = n.cross(&a).normalize();
    Ok(DarbouxFrame { n, a, f })
}

pub fn darboux_frame(features: &SegmentFeatures, choice: AxisChoice) -> Result<DarbouxFrame> {
    let axis = match choice {
        AxisChoice::Major => features.axis_major,
        AxisChoice::Minor => features.axis_minor,
    };
    frame_from_axes(features.mean_normal, axis)
}
