use serde::{Deserialize, Serialize};

use super::{Frame, NormalField};
use crate::error::{Error, Result};
use crate::geometry::{sorted_eigen3, Moments3, Vec3};
use crate::raster::{Grid, Pixel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalParams {
    /// Neighborhood radius in pixels.
    pub window: usize,
    /// Neighbors whose depth differs from the center by more than this (m)
    /// are left out, so windows do not straddle occlusion boundaries.
    pub max_depth_gap: f64,
}

impl Default for NormalParams {
    fn default() -> Self {
        Self {
            window: 5,
            max_depth_gap: 0.02,
        }
    }
}

/// Per-pixel PCA normals over a square window of valid neighbors.
///
/// The normal is the smallest-eigenvalue eigenvector of the neighborhood
/// covariance, flipped to face the camera. Pixels with fewer than three valid
/// neighbors, or collinear neighborhoods, are marked normal-invalid.
pub fn estimate_normals(frame: &Frame, params: NormalParams) -> Result<Frame> {
    if params.window < 1 {
        return Err(Error::InvalidParameter("normal window must be >= 1".into()));
    }
    let rad = params.window as isize;
    let (w, h) = (frame.width() as isize, frame.height() as isize);
    let mut normals = Grid::filled(frame.width(), frame.height(), Vec3::zeros());
    let mut valid = Grid::filled(frame.width(), frame.height(), false);
    let mut curvature = Grid::filled(frame.width(), frame.height(), 0.0);

    for idx in 0..frame.points.len() {
        if !frame.valid[idx] {
            continue;
        }
        let p = frame.points.pixel_of(idx);
        let center = frame.points[idx];
        let mut m = Moments3::with_origin(center);
        let (r0, c0) = (p.row as isize, p.col as isize);
        for r in (r0 - rad).max(0)..=(r0 + rad).min(h - 1) {
            for c in (c0 - rad).max(0)..=(c0 + rad).min(w - 1) {
                let q = Pixel::new(r as usize, c as usize);
                if frame.valid[q] && (frame.depth[q] - frame.depth[p]).abs() <= params.max_depth_gap {
                    m.push(&frame.points[q]);
                }
            }
        }
        if m.n < 3 {
            continue;
        }
        let (vals, vecs) = sorted_eigen3(&m.covariance());
        let total = vals[0] + vals[1] + vals[2];
        if !(vals[1] > 1e-12 * vals[0].max(1e-300)) || total <= 0.0 {
            continue;
        }
        let mut n = vecs[2];
        if n.dot(&center) > 0.0 {
            n = -n;
        }
        normals[idx] = n;
        valid[idx] = true;
        curvature[idx] = (vals[2] / total).max(0.0);
    }

    let mut out = frame.clone();
    out.normals = Some(NormalField {
        normals,
        valid,
        curvature,
    });
    Ok(out)
}
