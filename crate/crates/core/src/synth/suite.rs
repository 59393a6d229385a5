//! The fixed catalogue of evaluation scenes.

use super::{render, CameraSpec, NoiseSpec, ObjectSpec, Pose, Rendered, SceneSpec, Shape, TableSpec};
use crate::error::Result;
use crate::frame::Intrinsics;

pub const SUITE_SIZE: usize = 17;

/// Depth noise of the catalogue scenes (m).
pub const SUITE_SIGMA: f64 = 0.0015;

const TABLE: [u8; 3] = [150, 120, 90];

fn camera() -> CameraSpec {
    let mut k = Intrinsics::kinect();
    k.depth_scale = 1e-4;
    CameraSpec {
        position: [0.0, -0.30, 0.85],
        target: [0.0, 0.05, 0.0],
        intrinsics: k,
    }
}

fn scene(index: usize, name: &str, objects: Vec<ObjectSpec>) -> SceneSpec {
    SceneSpec {
        name: format!("{index:02}_{name}"),
        camera: camera(),
        table: Some(TableSpec {
            height: 0.0,
            half_extent: [0.6, 0.45],
            color: TABLE,
        }),
        objects,
        noise: NoiseSpec {
            sigma: SUITE_SIGMA,
            seed: 1000 + index as u64,
        },
    }
}

fn obj(name: &str, shape: Shape, pose: Pose, color: [u8; 3]) -> ObjectSpec {
    ObjectSpec {
        name: name.into(),
        shape,
        pose,
        color,
        camouflage: false,
    }
}

/// Box resting on the table, rotated by `yaw` degrees.
fn cuboid(name: &str, size: [f64; 3], x: f64, y: f64, yaw: f64, color: [u8; 3]) -> ObjectSpec {
    obj(
        name,
        Shape::Box { size },
        Pose::at(x, y, size[2] / 2.0).with_rpy(0.0, 0.0, yaw),
        color,
    )
}

fn upright_cylinder(name: &str, radius: f64, height: f64, x: f64, y: f64, color: [u8; 3]) -> ObjectSpec {
    obj(
        name,
        Shape::Cylinder { radius, height },
        Pose::at(x, y, height / 2.0),
        color,
    )
}

/// Cylinder lying on the table with its axis along world x rotated by `yaw`.
fn lying_cylinder(name: &str, radius: f64, length: f64, x: f64, y: f64, yaw: f64, color: [u8; 3]) -> ObjectSpec {
    obj(
        name,
        Shape::Cylinder { radius, height: length },
        Pose::at(x, y, radius).with_rpy(0.0, 90.0, yaw),
        color,
    )
}

/// Trapezoid-topped prism whose long sides converge at `angle` degrees.
fn wedge(name: &str, x: f64, y: f64, angle: f64, color: [u8; 3]) -> ObjectSpec {
    let (len, narrow, h) = (0.14, 0.04, 0.10);
    let spread = len * (angle / 2.0).to_radians().tan();
    obj(
        name,
        Shape::Prism {
            polygon: vec![
                [-len / 2.0, -narrow / 2.0],
                [len / 2.0, -narrow / 2.0 - spread],
                [len / 2.0, narrow / 2.0 + spread],
                [-len / 2.0, narrow / 2.0],
            ],
            height: h,
        },
        Pose::at(x, y, h / 2.0),
        color,
    )
}

fn hex_prism(name: &str, across_flats: f64, height: f64, x: f64, y: f64, color: [u8; 3]) -> ObjectSpec {
    let r = across_flats / 3f64.sqrt();
    let polygon = (0..6)
        .map(|i| {
            let t = (i as f64 * 60.0).to_radians();
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    obj(
        name,
        Shape::Prism { polygon, height },
        Pose::at(x, y, height / 2.0),
        color,
    )
}

fn slab(name: &str, size: [f64; 3], x: f64, y: f64, z: f64, color: [u8; 3]) -> ObjectSpec {
    obj(name, Shape::Box { size }, Pose::at(x, y, z), color)
}

const RED: [u8; 3] = [200, 40, 40];
const GREEN: [u8; 3] = [40, 170, 60];
const BLUE: [u8; 3] = [40, 70, 200];
const YELLOW: [u8; 3] = [220, 200, 40];
const PURPLE: [u8; 3] = [140, 50, 170];
const CYAN: [u8; 3] = [40, 180, 190];
const ORANGE: [u8; 3] = [230, 120, 30];
const GREY: [u8; 3] = [90, 90, 90];
const WHITE: [u8; 3] = [235, 235, 235];

/// The 17 catalogue scene specifications, in order.
pub fn suite_specs() -> Vec<SceneSpec> {
    vec![
        scene(
            1,
            "box_upright",
            vec![cuboid("box", [0.05, 0.12, 0.10], 0.0, 0.0, 0.0, RED)],
        ),
        scene(
            2,
            "box_rotated",
            vec![cuboid("box", [0.06, 0.11, 0.09], 0.02, 0.03, 30.0, GREEN)],
        ),
        scene(
            3,
            "box_tilted",
            vec![obj(
                "box",
                Shape::Box {
                    size: [0.045, 0.14, 0.08],
                },
                Pose::at(
                    0.0,
                    0.02,
                    0.04 * 12f64.to_radians().cos() + 0.07 * 12f64.to_radians().sin(),
                )
                .with_rpy(12.0, 0.0, -20.0),
                BLUE,
            )],
        ),
        scene(
            4,
            "cylinder_upright",
            vec![upright_cylinder("can", 0.03, 0.12, 0.0, 0.03, YELLOW)],
        ),
        scene(
            5,
            "cylinder_short",
            vec![upright_cylinder("jar", 0.04, 0.09, -0.03, 0.0, PURPLE)],
        ),
        scene(
            6,
            "cylinder_lying",
            vec![lying_cylinder("roll", 0.04, 0.16, 0.0, 0.03, 10.0, CYAN)],
        ),
        scene(7, "wedge", vec![wedge("wedge", 0.0, 0.02, 20.0, ORANGE)]),
        scene(
            8,
            "box_small",
            vec![cuboid("block", [0.045, 0.065, 0.08], 0.03, 0.0, -15.0, RED)],
        ),
        scene(
            9,
            "box_large",
            vec![cuboid("crate", [0.13, 0.16, 0.10], 0.0, 0.04, 5.0, GREY)],
        ),
        scene(10, "hex_prism", vec![hex_prism("nut", 0.052, 0.10, -0.02, 0.02, GREEN)]),
        scene(
            11,
            "clutter_1",
            vec![
                cuboid("box", [0.05, 0.10, 0.10], -0.20, 0.0, 15.0, RED),
                cuboid("crate", [0.14, 0.16, 0.12], 0.04, 0.14, 0.0, GREY),
                upright_cylinder("can", 0.03, 0.11, 0.24, -0.04, YELLOW),
                cuboid("book", [0.18, 0.12, 0.03], -0.02, -0.14, 5.0, BLUE),
                cuboid("block", [0.045, 0.13, 0.09], 0.24, 0.20, 0.0, GREEN),
            ],
        ),
        scene(
            12,
            "clutter_2",
            vec![
                upright_cylinder("can", 0.035, 0.12, -0.22, 0.10, YELLOW),
                cuboid("box", [0.06, 0.12, 0.09], 0.0, 0.0, -25.0, RED),
                lying_cylinder("roll", 0.035, 0.15, 0.20, 0.14, -5.0, CYAN),
                cuboid("crate", [0.15, 0.13, 0.10], 0.22, -0.10, 10.0, GREY),
                cuboid("tray", [0.16, 0.14, 0.025], -0.22, -0.14, 0.0, WHITE),
                hex_prism("nut", 0.05, 0.09, -0.02, 0.24, GREEN),
            ],
        ),
        scene(
            13,
            "clutter_3",
            vec![
                cuboid("box", [0.05, 0.11, 0.10], -0.24, 0.02, 0.0, RED),
                upright_cylinder("can", 0.03, 0.12, 0.22, 0.16, YELLOW),
                cuboid("crate", [0.13, 0.15, 0.11], -0.01, 0.14, 0.0, GREY),
                cuboid("coaster", [0.08, 0.08, 0.03], 0.0, -0.12, 0.0, WHITE),
                cuboid("left", [0.05, 0.12, 0.10], 0.20, -0.10, 0.0, BLUE),
                cuboid("right", [0.05, 0.12, 0.10], 0.254, -0.10, 0.0, PURPLE),
            ],
        ),
        scene(
            14,
            "clutter_4",
            vec![
                cuboid("box_a", [0.05, 0.12, 0.10], -0.26, 0.05, 10.0, RED),
                cuboid("box_b", [0.055, 0.10, 0.095], -0.12, -0.08, -10.0, GREEN),
                upright_cylinder("can", 0.032, 0.11, 0.02, 0.02, YELLOW),
                cuboid("crate", [0.14, 0.14, 0.10], 0.18, 0.16, 20.0, GREY),
                lying_cylinder("roll", 0.035, 0.14, 0.20, -0.10, 30.0, CYAN),
                cuboid("book", [0.2, 0.14, 0.035], -0.14, 0.22, -5.0, BLUE),
                hex_prism("nut", 0.05, 0.10, 0.05, -0.16, ORANGE),
            ],
        ),
        scene(
            15,
            "clutter_5",
            vec![
                cuboid("box_a", [0.05, 0.11, 0.10], -0.28, -0.06, 0.0, RED),
                cuboid("box_b", [0.05, 0.11, 0.10], -0.226, -0.06, 0.0, GREEN),
                upright_cylinder("can_a", 0.03, 0.12, -0.10, 0.12, YELLOW),
                upright_cylinder("can_b", 0.035, 0.10, 0.10, 0.14, PURPLE),
                cuboid("crate", [0.15, 0.14, 0.12], 0.28, 0.10, 0.0, GREY),
                wedge("wedge", 0.0, -0.10, 20.0, ORANGE),
                cuboid("block", [0.045, 0.07, 0.085], 0.22, -0.14, 35.0, BLUE),
                cuboid("tray", [0.14, 0.12, 0.02], -0.08, 0.30, 0.0, WHITE),
            ],
        ),
        scene(
            16,
            "occluded_box",
            vec![
                cuboid("box", [0.05, 0.12, 0.10], 0.0, 0.0, 0.0, RED),
                slab("slab", [0.12, 0.20, 0.01], 0.0, 0.0, 0.135, WHITE),
            ],
        ),
        scene(
            17,
            "slab_beside",
            vec![
                cuboid("box", [0.05, 0.12, 0.10], -0.04, 0.0, 0.0, RED),
                cuboid("box_2", [0.05, 0.12, 0.10], 0.12, 0.0, 0.0, GREEN),
                slab("slab", [0.12, 0.20, 0.01], 0.12, 0.0, 0.135, WHITE),
            ],
        ),
    ]
}

/// Renders the catalogue with default ground-truth criteria.
pub fn standard_suite() -> Result<Vec<(SceneSpec, Rendered)>> {
    suite_specs().into_iter().map(|s| render(&s).map(|r| (s, r))).collect()
}

/// A catalogue scene by its name, with or without the index prefix.
pub fn scene_by_name(name: &str) -> Option<SceneSpec> {
    suite_specs()
        .into_iter()
        .find(|s| s.name == name || s.name.get(3..) == Some(name))
}
