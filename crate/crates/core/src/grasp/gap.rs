use serde::{Deserialize, Serialize};

use super::{DarbouxFrame, GripperGeometry};
use crate::frame::{Frame, Intrinsics};
use crate::geometry::Vec3;
use crate::raster::Pixel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapParams {
    /// Half-extent of the finger column along n̂ (m).
    pub clearance_depth: f64,
    /// Points this close outside the handle rim are the object's own walls.
    pub rim_tolerance: f64,
    /// Only points within this distance of the center are considered (m).
    pub sphere_radius: f64,
}

impl GapParams {
    pub fn for_gripper(g: &GripperGeometry) -> Self {
        Self {
            clearance_depth: g.l,
            rim_tolerance: 0.003,
            sphere_radius: 1.5 * g.d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub gap_plus: f64,
    pub gap_minus: f64,
    /// Rejected before sweeping because the handle is wider than the opening.
    pub too_wide: bool,
    pub pass: bool,
}

/// Free space on both sides of a handle of half-width `r` along â.
///
/// On side s the finger column is `|f| ≤ w/2`, `|n| ≤ clearance_depth`,
/// `s·a ∈ (r + rim_tolerance, r + d/2]`; the gap is the smallest `s·a − r` of
/// any valid point inside it (and inside the search sphere), or `d/2` when the
/// column is empty. The handle passes if both gaps exceed `t`.
pub fn gap_check(
    frame: &Frame,
    c: &Vec3,
    axes: &DarbouxFrame,
    r: f64,
    gripper: &GripperGeometry,
    params: &GapParams,
) -> GapCheck {
    let cap = gripper.d / 2.0;
    if r > cap {
        return GapCheck {
            gap_plus: 0.0,
            gap_minus: 0.0,
            too_wide: true,
            pass: false,
        };
    }
    let (hw, hn) = (gripper.w / 2.0, params.clearance_depth);
    let inner = r + params.rim_tolerance;
    let outer = r + cap;
    let sphere2 = params.sphere_radius * params.sphere_radius;
    let mut gaps = [cap, cap];
    let bounds = [(-outer, outer), (-hw, hw), (-hn, hn)];
    for_each_in_box(frame, c, axes, bounds, |_, q, l| {
        if l.y.abs() > hw || l.z.abs() > hn || l.x.abs() <= inner || l.x.abs() > outer {
            return;
        }
        if (q - c).norm_squared() > sphere2 {
            return;
        }
        let side = usize::from(l.x < 0.0);
        gaps[side] = gaps[side].min(l.x.abs() - r);
    });
    GapCheck {
        gap_plus: gaps[0],
        gap_minus: gaps[1],
        too_wide: false,
        pass: gaps[0] > gripper.t && gaps[1] > gripper.t,
    }
}

/// Visits every valid point whose local coordinates may fall in the box
/// `bounds = [(a_lo, a_hi), (f_lo, f_hi), (n_lo, n_hi)]`, by scanning the image
/// window covering the box's projected corners. The callback still has to
/// test containment.
pub(super) fn for_each_in_box(
    frame: &Frame,
    origin: &Vec3,
    axes: &DarbouxFrame,
    bounds: [(f64, f64); 3],
    mut visit: impl FnMut(Pixel, &Vec3, &Vec3),
) {
    let (r0, r1, c0, c1) =
        pixel_window(&frame.intrinsics, origin, axes, bounds).unwrap_or((0, frame.height() - 1, 0, frame.width() - 1));
    for row in r0..=r1 {
        for col in c0..=c1 {
            let p = Pixel::new(row, col);
            if !frame.valid[p] {
                continue;
            }
            let q = &frame.points[p];
            visit(p, q, &axes.local(origin, q));
        }
    }
}

/// Inclusive pixel window containing the projection of the box, padded by
/// one pixel. `None` if a corner is not in front of the camera.
fn pixel_window(
    k: &Intrinsics,
    origin: &Vec3,
    axes: &DarbouxFrame,
    bounds: [(f64, f64); 3],
) -> Option<(usize, usize, usize, usize)> {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for i in 0..8 {
        let pick = |k: usize, (lo, hi): (f64, f64)| if i >> k & 1 == 0 { lo } else { hi };
        let corner = axes.world(origin, pick(0, bounds[0]), pick(1, bounds[1]), pick(2, bounds[2]));
        if corner.z <= 1e-6 {
            return None;
        }
        let (x, y) = k.project(&corner)?;
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
    if xmax < -1.0 || ymax < -1.0 || xmin > k.width as f64 || ymin > k.height as f64 {
        return Some((1, 0, 1, 0));
    }
    Some((
        clamp((ymin - 1.0).floor(), k.height),
        clamp((ymax + 1.0).ceil(), k.height),
        clamp((xmin - 1.0).floor(), k.width),
        clamp((xmax + 1.0).ceil(), k.width),
    ))
}
