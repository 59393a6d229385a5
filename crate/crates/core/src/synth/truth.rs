//! Analytic ground-truth handles: every planar surface of every object is
//! probed along its principal directions, and a handle is kept only if its
//! contact rims are parallel, perpendicular to the closing axis, narrower
//! than the opening, and the finger volumes and approach prism are free of
//! every primitive in the scene.

use serde::{Deserialize, Serialize};

use super::primitives::{GraspSurface, Solid};
use crate::geometry::{Vec2, Vec3};
use crate::grasp::{fit_line, GripperGeometry};

/// Criteria the ground truth is computed with. Defaults mirror the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthParams {
    pub gripper: GripperGeometry,
    /// Radians.
    pub theta_r: f64,
    /// Radians.
    pub theta_axis: f64,
    pub rim_tolerance: f64,
    pub occlusion_margin: f64,
    /// Spacing of handle centers along f̂ (m).
    pub position_step: f64,
    /// Grid spacing of the occupancy samples (m).
    pub sample_step: f64,
}

impl Default for TruthParams {
    fn default() -> Self {
        Self {
            gripper: GripperGeometry::default(),
            theta_r: 10f64.to_radians(),
            theta_axis: 15f64.to_radians(),
            rim_tolerance: 0.003,
            occlusion_margin: 0.005,
            position_step: 0.005,
            sample_step: 0.002,
        }
    }
}

/// A graspable handle. Vectors are unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtHandle {
    pub object: usize,
    /// Index into the object's surface list.
    pub face: usize,
    pub center: Vec3,
    pub n: Vec3,
    pub a: Vec3,
    pub f: Vec3,
    /// Full extent along â (m).
    pub width: f64,
}

impl GtHandle {
    pub(crate) fn transformed(&self, rot: &nalgebra::Matrix3<f64>, origin: &Vec3) -> Self {
        Self {
            center: rot * (self.center - origin),
            n: rot * self.n,
            a: rot * self.a,
            f: rot * self.f,
            ..*self
        }
    }
}

/// Rim pieces of `outline` inside the band `|f − s| ≤ hw`, in `(a, f)`
/// coordinates. Pieces lying on the band's own edges are dropped.
fn band_rims(outline: &[Vec2], s: f64, hw: f64) -> Vec<(Vec2, Vec2)> {
    let (lo, hi) = (s - hw, s + hw);
    let mut out = Vec::new();
    for i in 0..outline.len() {
        let (p, q) = (outline[i], outline[(i + 1) % outline.len()]);
        let df = q.y - p.y;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        if df.abs() < 1e-15 {
            if p.y < lo || p.y > hi {
                continue;
            }
        } else {
            let (ta, tb) = ((lo - p.y) / df, (hi - p.y) / df);
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
            if t0 > t1 {
                continue;
            }
        }
        let (a, b) = (p + (q - p) * t0, p + (q - p) * t1);
        let on_edge = |v: f64| (v - lo).abs() < 1e-9 || (v - hi).abs() < 1e-9;
        if on_edge(a.y) && on_edge(b.y) && (a.y - b.y).abs() < 1e-9 {
            continue;
        }
        if (b - a).norm() > 1e-12 {
            out.push((a, b));
        }
    }
    out
}

fn sample_segment(a: Vec2, b: Vec2, step: f64, out: &mut Vec<Vec2>) {
    let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
    for k in 0..=n {
        out.push(a + (b - a) * (k as f64 / n as f64));
    }
}

/// Splits rim pieces at `a = ac` and samples each side.
fn rim_samples(rims: &[(Vec2, Vec2)], ac: f64) -> (Vec<Vec2>, Vec<Vec2>) {
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    let step = 0.0005;
    for &(p, q) in rims {
        let pieces = if (p.x - ac) * (q.x - ac) < 0.0 {
            let m = p + (q - p) * ((ac - p.x) / (q.x - p.x));
            vec![(p, m), (m, q)]
        } else {
            vec![(p, q)]
        };
        for (a, b) in pieces {
            if (a.x + b.x) / 2.0 > ac {
                sample_segment(a, b, step, &mut plus);
            } else {
                sample_segment(a, b, step, &mut minus);
            }
        }
    }
    (plus, minus)
}

/// True if no solid (except `skip`) contains a grid sample of the box
/// `origin + a·x + f·y + n·z` with `(x, y, z)` in `bounds`. Lower bounds are
/// exclusive when `open_lo` is set for that axis.
pub(crate) fn box_is_free(
    solids: &[Solid],
    skip: Option<usize>,
    origin: &Vec3,
    axes: [Vec3; 3],
    bounds: [(f64, f64); 3],
    open_lo: [bool; 3],
    step: f64,
) -> bool {
    let mut lo = Vec3::repeat(f64::MAX);
    let mut hi = Vec3::repeat(f64::MIN);
    for i in 0..8 {
        let c = origin
            + axes[0] * if i & 1 == 0 { bounds[0].0 } else { bounds[0].1 }
            + axes[1] * if i & 2 == 0 { bounds[1].0 } else { bounds[1].1 }
            + axes[2] * if i & 4 == 0 { bounds[2].0 } else { bounds[2].1 };
        lo = lo.inf(&c);
        hi = hi.sup(&c);
    }
    let near: Vec<&Solid> = solids
        .iter()
        .enumerate()
        .filter(|(i, s)| Some(*i) != skip && s.aabb_overlaps(&lo, &hi))
        .map(|(_, s)| s)
        .collect();
    if near.is_empty() {
        return true;
    }
    let ticks = |k: usize| -> Vec<f64> {
        let (a, b) = bounds[k];
        let a = if open_lo[k] { a + 1e-6 } else { a };
        let n = ((b - a) / step).ceil().max(1.0) as usize;
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    };
    let (xs, ys, zs) = (ticks(0), ticks(1), ticks(2));
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                let p = origin + axes[0] * x + axes[1] * y + axes[2] * z;
                if near.iter().any(|s| s.contains(&p)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Handles on one surface of object `object` (index into `solids`).
pub(crate) fn surface_handles(
    solids: &[Solid],
    object: usize,
    face: usize,
    surf: &GraspSurface,
    p: &TruthParams,
) -> Vec<GtHandle> {
    let g = &p.gripper;
    let hw = g.w / 2.0;
    let mut out = Vec::new();
    for dir in &surf.directions {
        let dir = dir.normalize();
        let f2 = Vec2::new(-dir.y, dir.x);
        let a_w = (surf.u * dir.x + surf.v * dir.y).normalize();
        let f_w = surf.normal.cross(&a_w);
        let local: Vec<Vec2> = surf
            .outline
            .iter()
            .map(|q| Vec2::new(q.dot(&dir), q.dot(&f2)))
            .collect();
        let (fmin, fmax) = local
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), q| (lo.min(q.y), hi.max(q.y)));
        let positions: Vec<f64> = if fmax - fmin <= g.w {
            vec![(fmin + fmax) / 2.0]
        } else {
            let (lo, hi) = (fmin + hw, fmax - hw);
            let n = ((hi - lo) / p.position_step).floor() as usize;
            let mid = (lo + hi) / 2.0;
            // Symmetric about the middle of the surface.
            let half = n / 2;
            (0..=2 * half)
                .map(|k| mid + (k as f64 - half as f64) * p.position_step)
                .collect()
        };
        for s in positions {
            let rims = band_rims(&local, s, hw);
            let (amin, amax) = rims
                .iter()
                .flat_map(|(a, b)| [a.x, b.x])
                .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let width = amax - amin;
            if !(width > 0.0 && width < g.d) {
                continue;
            }
            let ac = (amin + amax) / 2.0;
            let (plus, minus) = rim_samples(&rims, ac);
            let (Ok(lp), Ok(lm)) = (fit_line(&plus), fit_line(&minus)) else {
                continue;
            };
            if lp.u.dot(&lm.u).abs() < p.theta_r.cos() {
                continue;
            }
            let um = if lp.u.dot(&lm.u) < 0.0 { -lm.u } else { lm.u };
            let avg = (lp.u + um).normalize();
            // In (a, f) coordinates the closing axis is the x axis.
            if avg.x.abs() > p.theta_axis.sin() {
                continue;
            }
            let c2 = dir * ac + f2 * s;
            let center = surf.origin + surf.u * c2.x + surf.v * c2.y;
            let axes = [a_w, f_w, surf.normal];
            let r = width / 2.0;
            let fingers_free = [1.0, -1.0].iter().all(|&side: &f64| {
                let mut ax = axes;
                ax[0] *= side;
                box_is_free(
                    solids,
                    None,
                    &center,
                    ax,
                    [(r + p.rim_tolerance, r + g.t), (-hw, hw), (-g.l, g.l)],
                    [true, false, false],
                    p.sample_step,
                )
            });
            if !fingers_free {
                continue;
            }
            let m = p.occlusion_margin;
            let approach_free = box_is_free(
                solids,
                Some(object),
                &center,
                axes,
                [(-(r + m), r + m), (-(hw + m), hw + m), (m, g.l + m)],
                [false, false, true],
                p.sample_step,
            );
            if !approach_free {
                continue;
            }
            out.push(GtHandle {
                object,
                face,
                center,
                n: surf.normal,
                a: a_w,
                f: f_w,
                width,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::primitives::{Pose, Shape};

    fn table() -> Solid {
        Solid::new(&Shape::Box { size: [1.0, 1.0, 0.04] }, &Pose::at(0.0, 0.0, -0.02)).unwrap()
    }

    fn boxed(size: [f64; 3], x: f64) -> Solid {
        Solid::new(&Shape::Box { size }, &Pose::at(x, 0.0, size[2] / 2.0)).unwrap()
    }

    fn top_handles(solids: &[Solid], object: usize) -> Vec<GtHandle> {
        let view = Vec3::new(0.0, -0.2, 0.9);
        let surfs = solids[object].surfaces(&view);
        let (face, top) = surfs.iter().enumerate().find(|(_, s)| s.normal.z > 0.99).unwrap();
        surface_handles(solids, object, face, top, &TruthParams::default())
    }

    #[test]
    fn band_rims_of_rectangle() {
        let rect = [
            Vec2::new(-0.03, -0.06),
            Vec2::new(0.03, -0.06),
            Vec2::new(0.03, 0.06),
            Vec2::new(-0.03, 0.06),
        ];
        let rims = band_rims(&rect, 0.0, 0.0125);
        assert_eq!(rims.len(), 2);
        for (a, b) in rims {
            assert!((a.x.abs() - 0.03).abs() < 1e-12 && (b - a).norm() - 0.025 < 1e-12);
        }
        // Band touching the bottom edge: the edge itself is not a rim.
        assert_eq!(band_rims(&rect, -0.0475, 0.0125).len(), 2);
    }

    #[test]
    fn isolated_box_top_is_graspable_across_its_width() {
        let solids = [boxed([0.05, 0.12, 0.10], 0.0), table()];
        let hs = top_handles(&solids, 0);
        assert!(!hs.is_empty());
        for h in &hs {
            assert!((h.width - 0.05).abs() < 1e-9);
            assert!(h.a.x.abs() > 0.999);
            assert!((h.center.z - 0.10).abs() < 1e-9);
            assert!(h.center.y.abs() <= 0.06 - 0.0125 + 1e-9);
        }
        // Centers every 5 mm over the 9.5 cm of admissible offsets.
        assert_eq!(hs.len(), 19);
    }

    #[test]
    fn neighbour_within_finger_thickness_blocks() {
        // Second box 5 mm away on +x: the +x finger has no room.
        let solids = [
            boxed([0.05, 0.12, 0.10], 0.0),
            boxed([0.05, 0.12, 0.10], 0.055),
            table(),
        ];
        assert!(top_handles(&solids, 0).is_empty());
        // 3 cm away leaves room.
        let solids = [boxed([0.05, 0.12, 0.10], 0.0), boxed([0.05, 0.12, 0.10], 0.08), table()];
        assert!(!top_handles(&solids, 0).is_empty());
    }

    #[test]
    fn short_box_hits_the_table() {
        let solids = [boxed([0.05, 0.12, 0.04], 0.0), table()];
        assert!(top_handles(&solids, 0).is_empty());
    }

    #[test]
    fn wide_box_and_converging_sides_are_rejected() {
        let solids = [boxed([0.12, 0.14, 0.10], 0.0), table()];
        assert!(top_handles(&solids, 0).is_empty());
        let t = 10f64.to_radians().tan();
        let wedge = Shape::Prism {
            polygon: vec![
                [-0.02, -0.07],
                [0.02, -0.07],
                [0.02 + 0.14 * t, 0.07],
                [-0.02 - 0.14 * t, 0.07],
            ],
            height: 0.10,
        };
        let solids = [Solid::new(&wedge, &Pose::at(0.0, 0.0, 0.05)).unwrap(), table()];
        assert!(top_handles(&solids, 0).is_empty());
    }

    #[test]
    fn slab_above_blocks_only_when_inside_the_prism() {
        let slab = |x: f64| {
            Solid::new(
                &Shape::Box {
                    size: [0.06, 0.2, 0.01],
                },
                &Pose::at(x, 0.0, 0.13),
            )
            .unwrap()
        };
        let solids = [boxed([0.05, 0.12, 0.10], 0.0), slab(0.0), table()];
        assert!(top_handles(&solids, 0).is_empty());
        let solids = [boxed([0.05, 0.12, 0.10], 0.0), slab(0.12), table()];
        assert!(!top_handles(&solids, 0).is_empty());
    }

    #[test]
    fn disk_top_yields_all_directions() {
        let cyl = Solid::new(
            &Shape::Cylinder {
                radius: 0.03,
                height: 0.1,
            },
            &Pose::at(0.0, 0.0, 0.05),
        )
        .unwrap();
        let solids = [cyl, table()];
        let hs = top_handles(&solids, 0);
        // Centered bands only: off-center chords have converging rims.
        let mut dirs: Vec<i64> = hs
            .iter()
            .map(|h| (h.a.y.atan2(h.a.x).to_degrees().round() as i64).rem_euclid(180))
            .collect();
        dirs.dedup();
        assert_eq!(dirs.len(), 18);
        for h in &hs {
            assert!(h.width > 0.05 && h.width <= 0.06 + 1e-9);
        }
    }
}
