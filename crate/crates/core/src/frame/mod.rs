//! RGB-D frames: intrinsics, deprojection, file loading, smoothing and normals.

mod io;
mod normals;
pub mod pcd;
mod smooth;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::raster::{Grid, Pixel};

pub use io::{load_frame, load_intrinsics, save_color_png, save_depth_png, save_intrinsics};
pub use normals::{estimate_normals, NormalParams};
pub use pcd::{load_pcd, save_pcd};
pub use smooth::smooth_cloud;

pub type Rgb = [u8; 3];

/// Pinhole camera intrinsics plus the metric scale of stored depth units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// Meters per stored depth unit.
    #[serde(default = "default_depth_scale")]
    pub depth_scale: f64,
}

fn default_depth_scale() -> f64 {
    0.001
}

impl Intrinsics {
    /// Kinect-style 640×480 camera.
    pub fn kinect() -> Self {
        Self {
            fx: 525.0,
            fy: 525.0,
            cx: 319.5,
            cy: 239.5,
            width: 640,
            height: 480,
            depth_scale: 0.001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidIntrinsics(m));
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return bad(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            ));
        }
        if self.width == 0 || self.height == 0 {
            return bad("image size must be non-zero".into());
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return bad(format!("cx={} outside [0, {})", self.cx, self.width));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return bad(format!("cy={} outside [0, {})", self.cy, self.height));
        }
        if !(self.depth_scale > 0.0) {
            return bad(format!("depth_scale={} must be positive", self.depth_scale));
        }
        Ok(())
    }

    /// 3D point for image position `(x, y)` at metric depth `z`.
    #[inline]
    pub fn deproject(&self, x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new((x - self.cx) * z / self.fx, (y - self.cy) * z / self.fy, z)
    }

    #[inline]
    pub fn deproject_pixel(&self, p: Pixel, z: f64) -> Vec3 {
        self.deproject(p.col as f64, p.row as f64, z)
    }

    /// Image position `(x, y)` of a camera-frame point. `None` behind the camera.
    #[inline]
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        (p.z > 1e-9).then(|| (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    /// Unit viewing ray through image position `(x, y)`.
    pub fn ray(&self, x: f64, y: f64) -> Vec3 {
        self.deproject(x, y, 1.0).normalize()
    }
}

/// Per-pixel surface normals with validity and a local curvature estimate.
#[derive(Debug, Clone)]
pub struct NormalField {
    pub normals: Grid<Vec3>,
    pub valid: Grid<bool>,
    /// Surface variation λ3 / (λ1 + λ2 + λ3) of the local neighborhood.
    pub curvature: Grid<f64>,
}

/// A registered color + depth frame with its organized point cloud.
#[derive(Debug, Clone)]
pub struct Frame {
    pub intrinsics: Intrinsics,
    pub color: Grid<Rgb>,
    /// Metric depth, 0 where invalid.
    pub depth: Grid<f64>,
    pub points: Grid<Vec3>,
    pub valid: Grid<bool>,
    pub normals: Option<NormalField>,
}

impl Frame {
    /// Builds a frame by deprojecting a metric depth raster.
    pub fn from_depth(intrinsics: Intrinsics, color: Grid<Rgb>, depth: Grid<f64>) -> Result<Self> {
        intrinsics.validate()?;
        check_dims(&intrinsics, color.width(), color.height(), "color")?;
        check_dims(&intrinsics, depth.width(), depth.height(), "depth")?;
        let depth = depth.map(|&z| if z.is_finite() && z > 0.0 { z } else { 0.0 });
        let valid = depth.map(|&z| z > 0.0);
        let points = Grid::from_fn(depth.width(), depth.height(), |p| {
            let z = depth[p];
            if z > 0.0 {
                intrinsics.deproject_pixel(p, z)
            } else {
                Vec3::zeros()
            }
        });
        Ok(Self {
            intrinsics,
            color,
            depth,
            points,
            valid,
            normals: None,
        })
    }

    /// Builds a frame from an organized cloud; non-finite or non-positive-z points are invalid.
    pub fn from_cloud(intrinsics: Intrinsics, color: Grid<Rgb>, cloud: Grid<Vec3>) -> Result<Self> {
        intrinsics.validate()?;
        check_dims(&intrinsics, color.width(), color.height(), "color")?;
        check_dims(&intrinsics, cloud.width(), cloud.height(), "cloud")?;
        let valid = cloud.map(|p| p.iter().all(|v| v.is_finite()) && p.z > 0.0);
        let points = Grid::from_fn(cloud.width(), cloud.height(), |p| {
            if valid[p] {
                cloud[p]
            } else {
                Vec3::zeros()
            }
        });
        let depth = Grid::from_fn(
            cloud.width(),
            cloud.height(),
            |p| {
                if valid[p] {
                    points[p].z
                } else {
                    0.0
                }
            },
        );
        Ok(Self {
            intrinsics,
            color,
            depth,
            points,
            valid,
            normals: None,
        })
    }

    pub fn width(&self) -> usize {
        self.intrinsics.width
    }

    pub fn height(&self) -> usize {
        self.intrinsics.height
    }

    #[inline]
    pub fn point(&self, p: Pixel) -> Option<Vec3> {
        self.valid[p].then(|| self.points[p])
    }

    #[inline]
    pub fn normal(&self, p: Pixel) -> Option<Vec3> {
        let nf = self.normals.as_ref()?;
        nf.valid[p].then(|| nf.normals[p])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.as_slice().iter().filter(|&&v| v).count()
    }

    /// Luminance raster using (0.299, 0.587, 0.114) weights.
    pub fn luminance(&self) -> Grid<f64> {
        self.color
            .map(|c| 0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64)
    }

    /// Writes color, depth and intrinsics files into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_color_png(&self.color, &dir.join("color.png"))?;
        save_depth_png(&self.depth, self.intrinsics.depth_scale, &dir.join("depth.png"))?;
        save_intrinsics(&self.intrinsics, &dir.join("intrinsics.toml"))
    }

    /// Loads a frame directory written by [`Frame::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let intrinsics = load_intrinsics(&dir.join("intrinsics.toml"))?;
        load_frame(&dir.join("color.png"), &dir.join("depth.png"), intrinsics)
    }
}

fn check_dims(k: &Intrinsics, w: usize, h: usize, what: &str) -> Result<()> {
    if w != k.width || h != k.height {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {w}x{h}, intrinsics say {}x{}",
            k.width, k.height
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k() -> Intrinsics {
        Intrinsics {
            fx: 500.0,
            fy: 480.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
            depth_scale: 0.001,
        }
    }

    #[test]
    fn principal_point_ray() {
        let p = k().deproject(320.0, 240.0, 1.0);
        assert_relative_eq!(p, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn forty_five_degree_ray() {
        let k = k();
        let p = k.deproject(k.cx + k.fx, k.cy, 2.0);
        assert_relative_eq!(p, Vec3::new(2.0, 0.0, 2.0));
    }

    #[test]
    fn intrinsics_validation() {
        let mut bad = k();
        bad.cx = 640.0;
        assert!(bad.validate().is_err());
        let mut bad = k();
        bad.fy = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = k();
        bad.depth_scale = -1.0;
        assert!(bad.validate().is_err());
        assert!(k().validate().is_ok());
    }

    #[test]
    fn invalid_depth_is_masked() {
        let mut k = k();
        k.width = 3;
        k.height = 2;
        k.cx = 1.0;
        k.cy = 1.0;
        let depth = Grid::from_vec(3, 2, vec![1.0, 0.0, f64::NAN, -2.0, 0.5, f64::INFINITY]);
        let f = Frame::from_depth(k, Grid::filled(3, 2, [0; 3]), depth).unwrap();
        assert_eq!(f.valid.as_slice(), &[true, false, false, false, true, false]);
        assert_eq!(f.valid_count(), 2);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let depth = Grid::filled(10, 10, 1.0);
        let err = Frame::from_depth(k(), Grid::filled(640, 480, [0; 3]), depth).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    proptest::proptest! {
        #[test]
        fn deproject_project_roundtrip(x in 0.0f64..639.0, y in 0.0f64..479.0, z in 0.2f64..8.0) {
            let k = k();
            let (u, v) = k.project(&k.deproject(x, y, z)).unwrap();
            proptest::prop_assert!((u - x).abs() < 0.5 && (v - y).abs() < 0.5);
            proptest::prop_assert!((u - x).abs() < 1e-9 && (v - y).abs() < 1e-9);
        }
    }
}
