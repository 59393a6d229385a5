//! Grasp handle detection for parallel-jaw grippers from a single RGB-D view.
//!
//! The pipeline segments the organized cloud into smooth patches, proposes
//! handles on each patch along both principal directions, and keeps those with
//! free space for the fingers, parallel boundary lines confirmed by intensity
//! or depth edges, and an unobstructed approach. Survivors are ranked by a
//! weighted cost. [`synth`] renders tabletop scenes with analytic ground truth
//! and [`eval`] scores detections against it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detect;
pub mod edges;
pub mod error;
pub mod eval;
pub mod frame;
pub mod geometry;
pub mod grasp;
pub mod output;
pub mod ranking;
pub mod raster;
pub mod segmentation;
pub mod synth;
pub mod viz;

pub use config::DetectConfig;
pub use detect::{detect_handles, Detection, StageCounts};
pub use error::{Error, Result};
pub use frame::{Frame, Intrinsics};
pub use geometry::{Vec2, Vec3};
pub use grasp::{GripperGeometry, HandleHypothesis, ValidatedHandle};
pub use ranking::RankedHandle;
