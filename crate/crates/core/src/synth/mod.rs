//! Deterministic synthetic tabletop scenes with analytic ground truth.
//!
//! Scenes are built in a z-up world frame with the table top at `table.height`.
//! Rendering casts one ray per pixel against convex primitives, shades faces
//! with a fixed directional light, and adds seeded Gaussian depth noise.
//! Ground-truth handles and masks are reported in the camera frame.

mod primitives;
mod suite;
mod truth;

use std::path::Path;

use image::{ImageBuffer, Luma};
use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, Intrinsics, Rgb};
use crate::geometry::Vec3;
use crate::raster::{Grid, Pixel};

pub use primitives::{GraspSurface, Pose, Shape, Solid};
pub use suite::{scene_by_name, standard_suite, suite_specs, SUITE_SIZE};
pub use truth::{GtHandle, TruthParams};

/// Mask value for pixels that hit nothing.
pub const MASK_BACKGROUND: u16 = 0;
/// Mask value for table pixels. Object `i` is `i + 2`.
pub const MASK_TABLE: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    /// World position (m).
    pub position: [f64; 3],
    /// World point on the optical axis.
    pub target: [f64; 3],
    pub intrinsics: Intrinsics,
}

impl CameraSpec {
    /// Columns are the camera x (right), y (down) and z (forward) axes in
    /// world coordinates. A camera looking straight down has image down
    /// along world −y.
    pub fn rotation(&self) -> Result<Matrix3<f64>> {
        let fwd = Vec3::from(self.target) - Vec3::from(self.position);
        if fwd.norm() < 1e-9 {
            return Err(Error::InvalidScene("camera target equals position".into()));
        }
        let fwd = fwd.normalize();
        let mut right = fwd.cross(&Vec3::z());
        if right.norm() < 1e-6 {
            // Looking straight up or down: image right is world ±x.
            right = fwd.cross(&Vec3::y());
        }
        let right = right.normalize();
        let down = fwd.cross(&right);
        Ok(Matrix3::from_columns(&[right, down, fwd]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    /// World z of the table top.
    pub height: f64,
    /// Half extents along world x and y.
    #[serde(default = "default_table_half")]
    pub half_extent: [f64; 2],
    pub color: Rgb,
}

fn default_table_half() -> [f64; 2] {
    [0.6, 0.45]
}

const TABLE_THICKNESS: f64 = 0.04;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub shape: Shape,
    pub pose: Pose,
    pub color: Rgb,
    /// Paint the object with the table color.
    #[serde(default)]
    pub camouflage: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of additive depth noise (m).
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub name: String,
    pub camera: CameraSpec,
    #[serde(default)]
    pub table: Option<TableSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl SceneSpec {
    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise.sigma = sigma;
        self
    }

    /// Solids in mask order: objects first, then the table.
    pub fn solids(&self) -> Result<Vec<Solid>> {
        let mut out = Vec::with_capacity(self.objects.len() + 1);
        for o in &self.objects {
            out.push(Solid::new(&o.shape, &o.pose)?);
        }
        if let Some(t) = &self.table {
            if !(t.half_extent[0] > 0.0 && t.half_extent[1] > 0.0) {
                return Err(Error::InvalidScene("table extents must be positive".into()));
            }
            out.push(Solid::new(
                &Shape::Box {
                    size: [2.0 * t.half_extent[0], 2.0 * t.half_extent[1], TABLE_THICKNESS],
                },
                &Pose::at(0.0, 0.0, t.height - TABLE_THICKNESS / 2.0),
            )?);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub name: String,
    pub pixel_count: usize,
    pub graspable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scene: String,
    pub objects: Vec<ObjectTruth>,
    /// Camera frame.
    pub handles: Vec<GtHandle>,
    /// Per-pixel owner: [`MASK_BACKGROUND`], [`MASK_TABLE`] or object + 2.
    /// Stored separately from the JSON file.
    #[serde(skip)]
    pub mask: Grid<u16>,
}

impl GroundTruth {
    pub fn object_at(&self, p: Pixel) -> Option<usize> {
        let m = self.mask[p];
        (m >= 2).then(|| (m - 2) as usize)
    }

    pub fn object_mask(&self, object: usize) -> Grid<bool> {
        self.mask.map(|&m| m as usize == object + 2)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("truth.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(&path, e))?;
        let path = dir.join("mask.png");
        let img: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(
            self.mask.width() as u32,
            self.mask.height() as u32,
            self.mask.as_slice().to_vec(),
        )
        .expect("buffer sized from raster");
        img.save(&path).map_err(|source| Error::Image { path, source })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("truth.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut gt: GroundTruth = serde_json::from_str(&text)?;
        let path = dir.join("mask.png");
        let img = image::open(&path).map_err(|source| Error::Image {
            path: path.clone(),
            source,
        })?;
        let img = match img {
            image::DynamicImage::ImageLuma16(i) => i,
            _ => return Err(Error::DepthFormat(path)),
        };
        gt.mask = Grid::from_vec(img.width() as usize, img.height() as usize, img.into_raw());
        Ok(gt)
    }
}

/// Output of [`render`].
#[derive(Debug, Clone)]
pub struct Rendered {
    pub frame: Frame,
    pub truth: GroundTruth,
    /// Exact surface normal of each hit, camera frame.
    pub surface_normals: Grid<Option<Vec3>>,
}

fn light_dir() -> Vec3 {
    Vec3::new(0.3, -0.4, 1.0).normalize()
}

fn shade(color: Rgb, n_world: &Vec3) -> Rgb {
    let k = 0.35 + 0.65 * n_world.dot(&light_dir()).max(0.0);
    color.map(|c| (c as f64 * k).round().clamp(0.0, 255.0) as u8)
}

pub fn render(spec: &SceneSpec) -> Result<Rendered> {
    render_with(spec, &TruthParams::default())
}

/// Renders `spec` and enumerates its ground-truth handles under `params`.
pub fn render_with(spec: &SceneSpec, params: &TruthParams) -> Result<Rendered> {
    let k = spec.camera.intrinsics;
    k.validate()?;
    params.gripper.validate()?;
    if !(spec.noise.sigma >= 0.0 && spec.noise.sigma.is_finite()) {
        return Err(Error::InvalidScene("noise sigma must be non-negative".into()));
    }
    let rot = spec.camera.rotation()?;
    let eye = Vec3::from(spec.camera.position);
    let solids = spec.solids()?;
    for (i, s) in solids.iter().enumerate() {
        if s.contains(&eye) {
            let name = spec.objects.get(i).map_or("table", |o| o.name.as_str());
            return Err(Error::InvalidScene(format!("camera inside {name}")));
        }
    }
    let table_color = spec.table.as_ref().map(|t| t.color);
    let colors: Vec<Rgb> = spec
        .objects
        .iter()
        .map(|o| match (o.camouflage, table_color) {
            (true, Some(c)) => c,
            _ => o.color,
        })
        .chain(table_color)
        .collect();
    let mask_of = |i: usize| {
        if i < spec.objects.len() {
            i as u16 + 2
        } else {
            MASK_TABLE
        }
    };

    let (w, h) = (k.width, k.height);
    let mut depth = Grid::filled(w, h, 0.0);
    let mut color = Grid::filled(w, h, [0u8; 3]);
    let mut mask = Grid::filled(w, h, MASK_BACKGROUND);
    let mut normals = Grid::filled(w, h, None);
    for p in depth.pixels().collect::<Vec<_>>() {
        let ray_cam = k.deproject_pixel(p, 1.0);
        let ray_w = rot * ray_cam;
        let mut best: Option<(f64, Vec3, usize)> = None;
        for (i, s) in solids.iter().enumerate() {
            if let Some((t, n)) = s.intersect(&eye, &ray_w)? {
                if best.is_none_or(|(bt, _, _)| t < bt) {
                    best = Some((t, n, i));
                }
            }
        }
        if let Some((t, n, i)) = best {
            // The ray has unit z in the camera frame, so t is the depth.
            depth[p] = t;
            color[p] = shade(colors[i], &n);
            mask[p] = mask_of(i);
            normals[p] = Some(rot.transpose() * n);
        }
    }

    if spec.noise.sigma > 0.0 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.noise.seed);
        let normal = Normal::new(0.0, spec.noise.sigma).map_err(|e| Error::InvalidScene(e.to_string()))?;
        for z in depth.as_mut_slice() {
            if *z > 0.0 {
                *z += normal.sample(&mut rng);
            }
        }
    }
    // Quantize exactly as a depth PNG round trip would.
    let scale = k.depth_scale;
    for z in depth.as_mut_slice() {
        if *z > 0.0 {
            let units = (*z / scale).round().clamp(1.0, u16::MAX as f64);
            *z = units * scale;
        }
    }
    let frame = Frame::from_depth(k, color, depth)?;

    let mut handles = Vec::new();
    for (i, s) in solids.iter().enumerate().take(spec.objects.len()) {
        for (face, surf) in s.surfaces(&eye).iter().enumerate() {
            handles.extend(truth::surface_handles(&solids, i, face, surf, params));
        }
    }
    let to_cam = rot.transpose();
    let handles: Vec<GtHandle> = handles.iter().map(|h| h.transformed(&to_cam, &eye)).collect();
    let objects = spec
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| ObjectTruth {
            name: o.name.clone(),
            pixel_count: mask.as_slice().iter().filter(|&&m| m == i as u16 + 2).count(),
            graspable: handles.iter().any(|h| h.object == i),
        })
        .collect();
    Ok(Rendered {
        frame,
        truth: GroundTruth {
            scene: spec.name.clone(),
            objects,
            handles,
            mask,
        },
        surface_normals: normals,
    })
}

/// Writes a scene directory: frame files, `scene.json`, `truth.json` and
/// `mask.png`.
pub fn save_scene(dir: &Path, spec: &SceneSpec, r: &Rendered) -> Result<()> {
    r.frame.save_dir(dir)?;
    spec.save(&dir.join("scene.json"))?;
    r.truth.save(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn camera_above(height: f64) -> CameraSpec {
        let mut k = Intrinsics::kinect();
        k.depth_scale = 1e-4;
        CameraSpec {
            position: [0.0, 0.0, height],
            target: [0.0, 0.0, 0.0],
            intrinsics: k,
        }
    }

    fn empty(name: &str) -> SceneSpec {
        SceneSpec {
            name: name.into(),
            camera: camera_above(0.8),
            table: None,
            objects: vec![],
            noise: NoiseSpec::default(),
        }
    }

    #[test]
    fn empty_spec_is_all_invalid() {
        let r = render(&empty("e")).unwrap();
        assert_eq!(r.frame.valid_count(), 0);
        assert!(r.truth.handles.is_empty());
    }

    #[test]
    fn face_on_box_depth_and_area() {
        let mut s = empty("box");
        // Top face at z = 0 seen from 0.8 m straight above.
        s.objects.push(ObjectSpec {
            name: "b".into(),
            shape: Shape::Box {
                size: [0.2, 0.12, 0.05],
            },
            pose: Pose::at(0.0, 0.0, -0.025),
            color: [200, 40, 40],
            camouflage: false,
        });
        let r = render(&s).unwrap();
        let m = r.truth.object_mask(0);
        let n = m.as_slice().iter().filter(|&&v| v).count();
        let expected = (0.2 * 525.0 / 0.8) * (0.12 * 525.0 / 0.8);
        assert!((n as f64 - expected).abs() / expected < 0.02, "{n} vs {expected}");
        for p in m.pixels().filter(|&p| m[p]) {
            assert!((r.frame.depth[p] - 0.8).abs() < 1e-4);
        }
        assert_eq!(r.truth.objects[0].pixel_count, n);
    }

    #[test]
    fn plane_round_trips_exactly() {
        let mut s = empty("plane");
        s.table = Some(TableSpec {
            height: 0.0,
            half_extent: [5.0, 5.0],
            color: [120, 120, 120],
        });
        let r = render(&s).unwrap();
        assert_eq!(r.frame.valid_count(), 640 * 480);
        assert!(r.frame.depth.as_slice().iter().all(|z| (z - 0.8).abs() < 1e-6));
        let dir = tempfile::tempdir().unwrap();
        save_scene(dir.path(), &s, &r).unwrap();
        let back = Frame::load_dir(dir.path()).unwrap();
        assert_eq!(back.depth, r.frame.depth);
        assert_eq!(back.color, r.frame.color);
        let gt = GroundTruth::load(dir.path()).unwrap();
        assert_eq!(gt, r.truth);
        assert_eq!(SceneSpec::load(&dir.path().join("scene.json")).unwrap(), s);
    }

    #[test]
    fn noise_is_seeded() {
        let mut s = empty("plane");
        s.table = Some(TableSpec {
            height: 0.0,
            half_extent: [5.0, 5.0],
            color: [120, 120, 120],
        });
        s.noise = NoiseSpec { sigma: 0.0015, seed: 9 };
        let a = render(&s).unwrap();
        let b = render(&s).unwrap();
        assert_eq!(a.frame.depth, b.frame.depth);
        s.noise.seed = 10;
        assert_ne!(render(&s).unwrap().frame.depth, a.frame.depth);
        let dev: Vec<f64> = a.frame.depth.as_slice().iter().map(|z| z - 0.8).collect();
        let sd = (dev.iter().map(|d| d * d).sum::<f64>() / dev.len() as f64).sqrt();
        assert!((sd - 0.0015).abs() < 1e-4);
    }

    #[test]
    fn camera_inside_object_is_an_error() {
        let mut s = empty("inside");
        s.objects.push(ObjectSpec {
            name: "big".into(),
            shape: Shape::Box { size: [2.0, 2.0, 2.0] },
            pose: Pose::at(0.0, 0.0, 0.5),
            color: [0, 0, 0],
            camouflage: false,
        });
        assert!(matches!(render(&s), Err(Error::InvalidScene(_))));
    }

    #[test]
    fn camouflage_uses_table_color() {
        let mut s = empty("camo");
        s.table = Some(TableSpec {
            height: 0.0,
            half_extent: [1.0, 1.0],
            color: [150, 120, 90],
        });
        s.objects.push(ObjectSpec {
            name: "b".into(),
            shape: Shape::Box { size: [0.05, 0.1, 0.1] },
            pose: Pose::at(0.0, 0.0, 0.05),
            color: [10, 200, 10],
            camouflage: true,
        });
        let r = render(&s).unwrap();
        let c = Pixel::new(240, 320);
        assert_eq!(r.truth.object_at(c), Some(0));
        assert_eq!(r.frame.color[c], r.frame.color[Pixel::new(240, 10)]);
    }
}
