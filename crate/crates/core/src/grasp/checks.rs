use serde::{Deserialize, Serialize};

use super::BoundaryLine;
use crate::frame::Intrinsics;
use crate::geometry::{Vec2, Vec3};

/// Returns `(pass, |u₊·u₋|)`; passes when the lines are within `theta_r`.
pub fn parallelism_check(plus: &BoundaryLine, minus: &BoundaryLine, theta_r: f64) -> (bool, f64) {
    let raw = plus.u.dot(&minus.u).abs().min(1.0);
    (raw >= theta_r.cos(), raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisCheck {
    pub pass: bool,
    /// |â_img·u_avg| in [0, 1].
    pub raw: f64,
    /// â projects to (almost) a point; the check passes by convention.
    pub degenerate: bool,
}

/// Step along â used to measure its image direction (m).
const AXIS_PROBE: f64 = 0.01;
/// Image displacements shorter than this (px) count as a degenerate projection.
const MIN_AXIS_PIXELS: f64 = 1e-3;

/// Unit image direction of the 3D axis `a` at `c`, or `None` when it
/// projects to (almost) a point.
pub fn project_axis(k: &Intrinsics, c: &Vec3, a: &Vec3) -> Option<Vec2> {
    let (x0, y0) = k.project(c)?;
    let (x1, y1) = k.project(&(c + a * AXIS_PROBE))?;
    let d = Vec2::new(x1 - x0, y1 - y0);
    (d.norm() >= MIN_AXIS_PIXELS).then(|| d.normalize())
}

/// Boundary lines must run across the closing axis: passes when the angle
/// between `a_img` and the mean line direction is within `tol` of 90°.
pub fn axis_perpendicularity_check(
    a_img: Option<Vec2>,
    plus: &BoundaryLine,
    minus: &BoundaryLine,
    tol: f64,
) -> AxisCheck {
    let Some(a_img) = a_img else {
        return AxisCheck {
            pass: true,
            raw: 0.0,
            degenerate: true,
        };
    };
    let um = if plus.u.dot(&minus.u) < 0.0 { -minus.u } else { minus.u };
    let sum = plus.u + um;
    // Antiparallel after the flip is impossible; guard anyway.
    let u_avg = if sum.norm() > 0.0 { sum.normalize() } else { plus.u };
    let raw = a_img.dot(&u_avg).abs().min(1.0);
    AxisCheck {
        pass: raw <= tol.sin(),
        raw,
        degenerate: false,
    }
}

/// Half the distance between the two lines, measured in the handle plane
/// (through `c` with normal `n`) at the feet of the perpendiculars dropped
/// from the projected center.
pub fn handle_radius(k: &Intrinsics, c: &Vec3, n: &Vec3, plus: &BoundaryLine, minus: &BoundaryLine) -> Option<f64> {
    let (cx, cy) = k.project(c)?;
    let center = Vec2::new(cx, cy);
    let foot = |l: &BoundaryLine| l.p0 + l.u * (center - l.p0).dot(&l.u);
    let lift = |p: Vec2| -> Option<Vec3> {
        let ray = k.ray(p.x, p.y);
        let denom = ray.dot(n);
        if denom.abs() < 1e-9 {
            return None;
        }
        let s = c.dot(n) / denom;
        (s > 0.0).then(|| ray * s)
    };
    let p = lift(foot(plus))?;
    let m = lift(foot(minus))?;
    Some((p - m).norm() / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(angle_deg: f64) -> BoundaryLine {
        let t = angle_deg.to_radians();
        BoundaryLine {
            p0: Vec2::zeros(),
            u: Vec2::new(t.cos(), t.sin()),
            inlier_count: 2,
            rms: 0.0,
        }
    }

    #[test]
    fn parallelism() {
        let ten = 10f64.to_radians();
        let (ok, raw) = parallelism_check(&line(30.0), &line(30.0), ten);
        assert!(ok && (raw - 1.0).abs() < 1e-12);
        assert!(!parallelism_check(&line(0.0), &line(20.0), ten).0);
        assert!(parallelism_check(&line(0.0), &line(5.0), ten).0);
        // Opposite sign conventions are the same line direction.
        assert!(parallelism_check(&line(0.0), &line(180.0), ten).0);
    }

    #[test]
    fn axis_check() {
        let tol = 15f64.to_radians();
        let perp = axis_perpendicularity_check(Some(Vec2::new(1.0, 0.0)), &line(90.0), &line(90.0), tol);
        assert!(perp.pass && perp.raw < 1e-12);
        let par = axis_perpendicularity_check(Some(Vec2::new(1.0, 0.0)), &line(0.0), &line(0.0), tol);
        assert!(!par.pass && (par.raw - 1.0).abs() < 1e-12);
        // u₋ flipped before averaging: the mean stays vertical.
        let flipped = axis_perpendicularity_check(Some(Vec2::new(1.0, 0.0)), &line(85.0), &line(275.0), tol);
        assert!(flipped.pass && flipped.raw < 1e-9);
        let degen = axis_perpendicularity_check(None, &line(0.0), &line(0.0), tol);
        assert!(degen.pass && degen.degenerate);
    }

    #[test]
    fn axis_along_view_ray_is_degenerate() {
        let k = Intrinsics::kinect();
        let c = Vec3::new(0.0, 0.0, 1.0);
        assert!(project_axis(&k, &c, &Vec3::z()).is_none());
        let d = project_axis(&k, &c, &Vec3::x()).unwrap();
        assert!((d - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn radius_from_lines() {
        let k = Intrinsics::kinect();
        let c = Vec3::new(0.0, 0.0, 1.0);
        // Vertical lines at ±0.03 m on the z = 1 plane.
        let off = 0.03 * k.fx;
        let mk = |x: f64| BoundaryLine {
            p0: Vec2::new(k.cx + x, k.cy + 17.0),
            u: Vec2::new(0.0, 1.0),
            inlier_count: 10,
            rms: 0.0,
        };
        let r = handle_radius(&k, &c, &(-Vec3::z()), &mk(off), &mk(-off)).unwrap();
        assert!((r - 0.03).abs() < 1e-9);
    }
}
