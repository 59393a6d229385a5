//! Convex solids for the scene generator: ray casting, containment, and the
//! planar surfaces that ground-truth handles are enumerated on.

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    /// Full edge lengths along local x, y, z; centered on the origin.
    Box { size: [f64; 3] },
    /// Axis along local z, centered on the origin.
    Cylinder { radius: f64, height: f64 },
    /// Convex polygon in local xy extruded over `|z| ≤ height/2`.
    Prism { polygon: Vec<[f64; 2]>, height: f64 },
}

/// Rigid placement: rotation by roll, pitch, yaw (degrees, about x, y, z)
/// followed by translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    #[serde(default)]
    pub rpy_deg: [f64; 3],
}

impl Pose {
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        Self {
            position: [x, y, z],
            rpy_deg: [0.0; 3],
        }
    }

    pub fn with_rpy(mut self, roll: f64, pitch: f64, yaw: f64) -> Self {
        self.rpy_deg = [roll, pitch, yaw];
        self
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        let [r, p, y] = self.rpy_deg.map(f64::to_radians);
        Rotation3::from_euler_angles(r, p, y)
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::from(self.position)
    }
}

/// Planar patch on which ground-truth handles are enumerated. `u × v = normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspSurface {
    pub origin: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    /// Convex counter-clockwise outline in `(u, v)` coordinates (m).
    pub outline: Vec<Vec2>,
    /// Candidate closing directions in `(u, v)` coordinates.
    pub directions: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy)]
struct HalfSpace {
    n: Vec3,
    h: f64,
}

/// A placed shape.
#[derive(Debug, Clone)]
pub struct Solid {
    pub shape: Shape,
    rot: Rotation3<f64>,
    pos: Vec3,
    planes: Vec<HalfSpace>,
    lo: Vec3,
    hi: Vec3,
}

const DISK_SEGMENTS: usize = 72;

impl Solid {
    pub fn new(shape: &Shape, pose: &Pose) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidScene(m.to_string()));
        let mut shape = shape.clone();
        let planes = match &mut shape {
            Shape::Box { size } => {
                if size.iter().any(|s| !(*s > 0.0)) {
                    return bad("box extents must be positive");
                }
                let mut v = Vec::new();
                for axis in 0..3 {
                    let mut n = Vec3::zeros();
                    n[axis] = 1.0;
                    v.push(HalfSpace { n, h: size[axis] / 2.0 });
                    v.push(HalfSpace {
                        n: -n,
                        h: size[axis] / 2.0,
                    });
                }
                v
            }
            Shape::Cylinder { radius, height } => {
                if !(*radius > 0.0 && *height > 0.0) {
                    return bad("cylinder radius and height must be positive");
                }
                Vec::new()
            }
            Shape::Prism { polygon, height } => {
                if !(*height > 0.0) || polygon.len() < 3 {
                    return bad("prism needs a positive height and at least 3 vertices");
                }
                let pts: Vec<Vec2> = polygon.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                let area: f64 = (0..pts.len())
                    .map(|i| {
                        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                        a.x * b.y - a.y * b.x
                    })
                    .sum();
                if area < 0.0 {
                    polygon.reverse();
                }
                let pts: Vec<Vec2> = polygon.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                let n = pts.len();
                let mut v = Vec::new();
                for i in 0..n {
                    let (a, b, c) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
                    let e1 = b - a;
                    let e2 = c - b;
                    if e1.x * e2.y - e1.y * e2.x <= 0.0 {
                        return bad("prism polygon must be strictly convex");
                    }
                    let nn = Vec3::new(e1.y, -e1.x, 0.0).normalize();
                    v.push(HalfSpace {
                        n: nn,
                        h: nn.x * a.x + nn.y * a.y,
                    });
                }
                v.push(HalfSpace {
                    n: Vec3::z(),
                    h: *height / 2.0,
                });
                v.push(HalfSpace {
                    n: -Vec3::z(),
                    h: *height / 2.0,
                });
                v
            }
        };
        let rot = pose.rotation();
        let pos = pose.translation();
        let mut s = Self {
            shape,
            rot,
            pos,
            planes,
            lo: Vec3::zeros(),
            hi: Vec3::zeros(),
        };
        let (lo, hi) = s.compute_aabb();
        s.lo = lo;
        s.hi = hi;
        Ok(s)
    }

    pub fn center(&self) -> Vec3 {
        self.pos
    }

    pub fn rotation(&self) -> &Rotation3<f64> {
        &self.rot
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        (self.lo, self.hi)
    }

    fn local_corners(&self) -> Vec<Vec3> {
        let half = match &self.shape {
            Shape::Box { size } => Vec3::new(size[0], size[1], size[2]) / 2.0,
            Shape::Cylinder { radius, height } => Vec3::new(*radius, *radius, height / 2.0),
            Shape::Prism { polygon, height } => {
                let m = polygon.iter().fold(0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
                Vec3::new(m, m, height / 2.0)
            }
        };
        (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -half.x } else { half.x },
                    if i & 2 == 0 { -half.y } else { half.y },
                    if i & 4 == 0 { -half.z } else { half.z },
                )
            })
            .collect()
    }

    fn compute_aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::MAX);
        let mut hi = Vec3::repeat(f64::MIN);
        for c in self.local_corners() {
            let w = self.to_world(&c);
            lo = lo.inf(&w);
            hi = hi.sup(&w);
        }
        (lo, hi)
    }

    pub fn aabb_overlaps(&self, lo: &Vec3, hi: &Vec3) -> bool {
        (0..3).all(|i| self.lo[i] <= hi[i] && lo[i] <= self.hi[i])
    }

    fn to_local(&self, p: &Vec3) -> Vec3 {
        self.rot.inverse() * (p - self.pos)
    }

    fn to_world(&self, p: &Vec3) -> Vec3 {
        self.rot * p + self.pos
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        if (0..3).any(|i| p[i] < self.lo[i] || p[i] > self.hi[i]) {
            return false;
        }
        let q = self.to_local(p);
        match &self.shape {
            Shape::Cylinder { radius, height } => q.z.abs() <= height / 2.0 && q.x * q.x + q.y * q.y <= radius * radius,
            _ => self.planes.iter().all(|hs| hs.n.dot(&q) <= hs.h),
        }
    }

    /// First intersection of the ray `o + t·d` with `t > 0`, as `(t, outward
    /// normal)`. Errors if the ray origin lies inside the solid.
    pub fn intersect(&self, o: &Vec3, d: &Vec3) -> Result<Option<(f64, Vec3)>> {
        let lo = self.to_local(o);
        let ld = self.rot.inverse() * d;
        let hit = match &self.shape {
            Shape::Cylinder { radius, height } => cylinder_hit(&lo, &ld, *radius, *height),
            _ => planes_hit(&self.planes, &lo, &ld),
        };
        match hit {
            Some((t_in, _, _)) if t_in < 0.0 => Err(Error::InvalidScene("camera inside an object".into())),
            Some((t_in, t_out, n)) if t_in <= t_out => Ok(Some((t_in, self.rot * n))),
            _ => Ok(None),
        }
    }

    /// Planar patches for handle enumeration. Curved cylinder walls are
    /// replaced by the rectangle through the mean height of their visible
    /// half, seen from `viewpoint`.
    pub fn surfaces(&self, viewpoint: &Vec3) -> Vec<GraspSurface> {
        let mut out = Vec::new();
        let rect = |hu: f64, hv: f64| {
            vec![
                Vec2::new(-hu, -hv),
                Vec2::new(hu, -hv),
                Vec2::new(hu, hv),
                Vec2::new(-hu, hv),
            ]
        };
        let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
        match &self.shape {
            Shape::Box { size } => {
                for k in 0..3 {
                    for sign in [1.0, -1.0] {
                        let n = axes[k] * sign;
                        let u = axes[(k + 1) % 3] * sign;
                        let v = n.cross(&u);
                        let (ku, kv) = ((k + 1) % 3, (k + 2) % 3);
                        out.push(self.surface(
                            n * size[k] / 2.0,
                            n,
                            u,
                            v,
                            rect(size[ku] / 2.0, size[kv] / 2.0),
                            vec![Vec2::x(), Vec2::y()],
                        ));
                    }
                }
            }
            Shape::Cylinder { radius, height } => {
                let disk: Vec<Vec2> = (0..DISK_SEGMENTS)
                    .map(|i| {
                        let t = i as f64 * std::f64::consts::TAU / DISK_SEGMENTS as f64;
                        Vec2::new(radius * t.cos(), radius * t.sin())
                    })
                    .collect();
                let dirs: Vec<Vec2> = (0..18)
                    .map(|i| {
                        let t = (i as f64 * 10.0).to_radians();
                        Vec2::new(t.cos(), t.sin())
                    })
                    .collect();
                for sign in [1.0, -1.0] {
                    let n = Vec3::z() * sign;
                    let u = Vec3::x();
                    let v = n.cross(&u);
                    // Keep (u, v) counter-clockwise for the outline.
                    let outline = if sign > 0.0 {
                        disk.clone()
                    } else {
                        disk.iter().map(|p| Vec2::new(p.x, -p.y)).collect()
                    };
                    out.push(self.surface(n * (*height / 2.0), n, u, v, outline, dirs.clone()));
                }
                let view = self.to_local(viewpoint);
                let radial = Vec3::new(view.x, view.y, 0.0);
                if radial.norm() > 1e-9 {
                    let n = radial.normalize();
                    let u = Vec3::z();
                    let v = n.cross(&u);
                    let mean_height = radius * std::f64::consts::FRAC_PI_4;
                    out.push(self.surface(
                        n * mean_height,
                        n,
                        u,
                        v,
                        rect(height / 2.0, *radius),
                        vec![Vec2::x(), Vec2::y()],
                    ));
                }
            }
            Shape::Prism { polygon, height } => {
                let pts: Vec<Vec2> = polygon.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                let mut dirs: Vec<Vec2> = Vec::new();
                for i in 0..pts.len() {
                    let e = (pts[(i + 1) % pts.len()] - pts[i]).normalize();
                    for d in [e, Vec2::new(-e.y, e.x)] {
                        if dirs.iter().all(|q| q.dot(&d).abs() < 1f64.to_radians().cos()) {
                            dirs.push(d);
                        }
                    }
                }
                for sign in [1.0, -1.0] {
                    let n = Vec3::z() * sign;
                    let u = Vec3::x();
                    let v = n.cross(&u);
                    let outline = if sign > 0.0 {
                        pts.clone()
                    } else {
                        pts.iter().rev().map(|p| Vec2::new(p.x, -p.y)).collect()
                    };
                    let dd = if sign > 0.0 {
                        dirs.clone()
                    } else {
                        dirs.iter().map(|p| Vec2::new(p.x, -p.y)).collect()
                    };
                    out.push(self.surface(n * (*height / 2.0), n, u, v, outline, dd));
                }
                for i in 0..pts.len() {
                    let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                    let e = b - a;
                    let len = e.norm();
                    let u = Vec3::new(e.x, e.y, 0.0) / len;
                    let n = Vec3::new(e.y, -e.x, 0.0) / len;
                    let v = n.cross(&u);
                    let mid = (a + b) / 2.0;
                    out.push(self.surface(
                        Vec3::new(mid.x, mid.y, 0.0),
                        n,
                        u,
                        v,
                        rect(len / 2.0, height / 2.0),
                        vec![Vec2::x(), Vec2::y()],
                    ));
                }
            }
        }
        out
    }

    fn surface(
        &self,
        origin: Vec3,
        n: Vec3,
        u: Vec3,
        v: Vec3,
        outline: Vec<Vec2>,
        directions: Vec<Vec2>,
    ) -> GraspSurface {
        GraspSurface {
            origin: self.to_world(&origin),
            normal: self.rot * n,
            u: self.rot * u,
            v: self.rot * v,
            outline,
            directions,
        }
    }
}

/// Cyrus–Beck clipping against half-spaces `n·x ≤ h`. Returns the parameter
/// interval and the entering normal.
fn planes_hit(planes: &[HalfSpace], o: &Vec3, d: &Vec3) -> Option<(f64, f64, Vec3)> {
    let (mut t_in, mut t_out) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut n_in = Vec3::zeros();
    for hs in planes {
        let denom = hs.n.dot(d);
        let dist = hs.h - hs.n.dot(o);
        if denom.abs() < 1e-15 {
            if dist < 0.0 {
                return None;
            }
            continue;
        }
        let t = dist / denom;
        if denom < 0.0 {
            if t > t_in {
                t_in = t;
                n_in = hs.n;
            }
        } else if t < t_out {
            t_out = t;
        }
    }
    (t_out > 0.0 && t_in <= t_out).then_some((t_in, t_out, n_in))
}

fn cylinder_hit(o: &Vec3, d: &Vec3, radius: f64, height: f64) -> Option<(f64, f64, Vec3)> {
    let caps = [
        HalfSpace {
            n: Vec3::z(),
            h: height / 2.0,
        },
        HalfSpace {
            n: -Vec3::z(),
            h: height / 2.0,
        },
    ];
    let (cz_in, cz_out, cap_n) = planes_hit(&caps, o, d).or_else(|| {
        // Ray parallel to the caps and between them.
        (d.z.abs() < 1e-15 && o.z.abs() <= height / 2.0).then_some((f64::NEG_INFINITY, f64::INFINITY, Vec3::zeros()))
    })?;
    let a = d.x * d.x + d.y * d.y;
    let b = 2.0 * (o.x * d.x + o.y * d.y);
    let c = o.x * o.x + o.y * o.y - radius * radius;
    let (r_in, r_out) = if a < 1e-15 {
        if c > 0.0 {
            return None;
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a))
    };
    let t_in = cz_in.max(r_in);
    let t_out = cz_out.min(r_out);
    if !(t_out > 0.0 && t_in <= t_out) {
        return None;
    }
    let n = if r_in >= cz_in {
        let p = o + d * t_in;
        Vec3::new(p.x, p.y, 0.0) / radius
    } else {
        cap_n
    };
    Some((t_in, t_out, n))
}
