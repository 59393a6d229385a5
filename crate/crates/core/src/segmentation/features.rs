use serde::{Deserialize, Serialize};

use super::Segment;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::{axis_angle, sorted_eigen3, Moments3, Vec3};

/// Centroid, mean normal and principal directions of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentFeatures {
    pub centroid: Vec3,
    pub mean_normal: Vec3,
    pub axis_major: Vec3,
    pub axis_minor: Vec3,
    /// Covariance eigenvalues, descending (m²).
    pub eigvals: [f64; 3],
    pub extent_major: f64,
    pub extent_minor: f64,
    /// Mean normal deviates more than 30° from the least-variance direction.
    pub noisy: bool,
}

/// PCA features of a segment's 3D points.
pub fn segment_features(frame: &Frame, seg: &Segment) -> Result<SegmentFeatures> {
    let nf = frame
        .normals
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("segment features need normals".into()))?;
    let points: Vec<Vec3> = seg.pixels.iter().map(|&p| frame.points[p]).collect();
    let normals: Vec<Vec3> = seg.pixels.iter().map(|&p| nf.normals[p]).collect();
    features_from_points(&points, &normals)
}

pub fn features_from_points(points: &[Vec3], normals: &[Vec3]) -> Result<SegmentFeatures> {
    if points.len() < 3 {
        return Err(Error::DegenerateSegment(format!("{} points", points.len())));
    }
    let mut m = Moments3::with_origin(points[0]);
    for p in points {
        m.push(p);
    }
    let centroid = m.mean();
    let (eigvals, vecs) = sorted_eigen3(&m.covariance());
    if !(eigvals[0] > 0.0) || eigvals[1] <= 1e-12 * eigvals[0] {
        return Err(Error::DegenerateSegment("rank < 2".into()));
    }
    let eigvals = eigvals.map(|v| v.max(0.0));

    let sum: Vec3 = normals.iter().sum();
    let mean_normal = if sum.norm() > 1e-9 {
        sum.normalize()
    } else if vecs[2].dot(&centroid) > 0.0 {
        -vecs[2]
    } else {
        vecs[2]
    };
    let noisy = axis_angle(&mean_normal, &vecs[2]) > 30f64.to_radians();

    // Gram–Schmidt against the mean normal; fall back to the second axis if
    // the first is (nearly) parallel to it.
    let mut major = vecs[0] - mean_normal * vecs[0].dot(&mean_normal);
    if major.norm() < 1e-6 {
        major = vecs[1] - mean_normal * vecs[1].dot(&mean_normal);
    }
    let major = major.normalize();
    let mut minor = mean_normal.cross(&major);
    if minor.dot(&vecs[1]) < 0.0 {
        minor = -minor;
    }

    let span = |axis: &Vec3| {
        let (lo, hi) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
            let t = (p - centroid).dot(axis);
            (lo.min(t), hi.max(t))
        });
        hi - lo
    };
    Ok(SegmentFeatures {
        centroid,
        mean_normal,
        axis_major: major,
        axis_minor: minor,
        eigvals,
        extent_major: span(&major),
        extent_minor: span(&minor),
        noisy,
    })
}
