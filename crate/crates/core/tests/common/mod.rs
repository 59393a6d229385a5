#![allow(dead_code)]

use edgegrasp::frame::estimate_normals;
use edgegrasp::raster::{Grid, Pixel};
use edgegrasp::segmentation::{region_grow, Segmentation};
use edgegrasp::synth::{render, CameraSpec, NoiseSpec, ObjectSpec, Pose, Rendered, SceneSpec, Shape, TableSpec};
use edgegrasp::{DetectConfig, Frame, Intrinsics, Vec3};

pub const TABLE: [u8; 3] = [150, 120, 90];

pub fn kinect() -> Intrinsics {
    let mut k = Intrinsics::kinect();
    k.depth_scale = 1e-4;
    k
}

/// Straight down from `height` above the table; image right is world +x,
/// image down is world −y.
pub fn overhead(height: f64) -> CameraSpec {
    CameraSpec {
        position: [0.0, 0.0, height],
        target: [0.0, 0.0, 0.0],
        intrinsics: kinect(),
    }
}

/// The oblique view used by the catalogue.
pub fn oblique() -> CameraSpec {
    CameraSpec {
        position: [0.0, -0.30, 0.85],
        target: [0.0, 0.05, 0.0],
        intrinsics: kinect(),
    }
}

pub fn scene(name: &str, camera: CameraSpec, objects: Vec<ObjectSpec>) -> SceneSpec {
    SceneSpec {
        name: name.into(),
        camera,
        table: Some(TableSpec {
            height: 0.0,
            half_extent: [0.6, 0.45],
            color: TABLE,
        }),
        objects,
        noise: NoiseSpec::default(),
    }
}

pub fn boxed(name: &str, size: [f64; 3], x: f64, y: f64, color: [u8; 3]) -> ObjectSpec {
    ObjectSpec {
        name: name.into(),
        shape: Shape::Box { size },
        pose: Pose::at(x, y, size[2] / 2.0),
        color,
        camouflage: false,
    }
}

pub fn rendered(spec: &SceneSpec) -> Rendered {
    render(spec).expect("scene renders")
}

pub fn with_normals(frame: &Frame) -> Frame {
    estimate_normals(frame, DetectConfig::default().normals).unwrap()
}

pub fn segment(frame: &Frame) -> Segmentation {
    region_grow(frame, &DetectConfig::default().region_params()).unwrap()
}

/// World-to-camera rotation of a scene.
pub fn to_camera(spec: &SceneSpec) -> nalgebra::Matrix3<f64> {
    spec.camera.rotation().unwrap().transpose()
}

pub fn world_point(spec: &SceneSpec, p: Vec3) -> Vec3 {
    to_camera(spec) * (p - Vec3::from(spec.camera.position))
}

/// Segment holding the most pixels of object `obj`.
pub fn dominant_segment(seg: &Segmentation, mask: &Grid<bool>) -> usize {
    let mut best = (0, 0);
    for s in &seg.segments {
        let n = s.pixels.iter().filter(|&&p| mask[p]).count();
        if n > best.1 {
            best = (s.id, n);
        }
    }
    best.0
}

pub fn pixel_of(frame: &Frame, p: &Vec3) -> Pixel {
    let (x, y) = frame.intrinsics.project(p).unwrap();
    Pixel::new(y.round() as usize, x.round() as usize)
}
