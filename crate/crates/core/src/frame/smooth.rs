use super::Frame;
use crate::error::{Error, Result};
use crate::raster::{Grid, Pixel};

/// Edge-preserving bilateral smoothing of depth.
///
/// Neighbors within `ceil(2·spatial_sigma)` pixels contribute with a Gaussian
/// spatial weight times a Gaussian range weight; neighbors whose depth differs
/// by more than `3·range_sigma` are excluded. Points are moved along their
/// viewing rays to the smoothed depth, so invalid pixels stay invalid.
pub fn smooth_cloud(frame: &Frame, spatial_sigma: f64, range_sigma: f64) -> Result<Frame> {
    if !(spatial_sigma > 0.0) || !(range_sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing sigmas must be positive (spatial={spatial_sigma}, range={range_sigma})"
        )));
    }
    let radius = (2.0 * spatial_sigma).ceil() as isize;
    let side = (2 * radius + 1) as usize;
    let mut spatial = Vec::with_capacity(side * side);
    for dr in -radius..=radius {
        for dc in -radius..=radius {
            let d2 = (dr * dr + dc * dc) as f64;
            spatial.push((-d2 / (2.0 * spatial_sigma * spatial_sigma)).exp());
        }
    }
    let cutoff = 3.0 * range_sigma;
    let inv_2r2 = 1.0 / (2.0 * range_sigma * range_sigma);

    let (w, h) = (frame.width() as isize, frame.height() as isize);
    let depth = &frame.depth;
    let smoothed = Grid::from_fn(frame.width(), frame.height(), |p| {
        let z0 = depth[p];
        if !frame.valid[p] {
            return 0.0;
        }
        let (r0, c0) = (p.row as isize, p.col as isize);
        let mut acc = 0.0;
        let mut wsum = 0.0;
        let mut k = 0;
        for dr in -radius..=radius {
            let r = r0 + dr;
            if r < 0 || r >= h {
                k += side;
                continue;
            }
            for dc in -radius..=radius {
                let c = c0 + dc;
                let ws = spatial[k];
                k += 1;
                if c < 0 || c >= w {
                    continue;
                }
                let q = Pixel::new(r as usize, c as usize);
                if !frame.valid[q] {
                    continue;
                }
                let dz = depth[q] - z0;
                if dz.abs() > cutoff {
                    continue;
                }
                let wt = ws * (-dz * dz * inv_2r2).exp();
                acc += wt * dz;
                wsum += wt;
            }
        }
        // Accumulating offsets from z0 keeps constant regions exact.
        z0 + acc / wsum
    });

    let points = Grid::from_fn(frame.width(), frame.height(), |p| {
        if frame.valid[p] {
            frame.points[p] * (smoothed[p] / depth[p])
        } else {
            frame.points[p]
        }
    });
    Ok(Frame {
        intrinsics: frame.intrinsics,
        color: frame.color.clone(),
        depth: smoothed,
        points,
        valid: frame.valid.clone(),
        normals: None,
    })
}
