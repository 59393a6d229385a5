//! Grasp hypotheses: Darboux frames, finger clearance, boundary lines and the
//! parallelism, axis and occlusion filters.

mod checks;
mod frame;
mod gap;
mod lines;
mod occlusion;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};

pub use checks::{axis_perpendicularity_check, handle_radius, parallelism_check, project_axis, AxisCheck};
pub use frame::{darboux_frame, frame_from_axes, DarbouxFrame};
pub use gap::{gap_check, GapCheck, GapParams};
pub use lines::{extract_boundary_lines, fit_line};
pub use occlusion::{occlusion_filter, OcclusionCheck, Prism};
pub use pipeline::{
    candidates, contact_rim, evaluate_candidate, Candidate, GraspContext, GraspParams, HypothesisRecord, Rejection,
    StageFlags,
};

/// Parallel-jaw gripper dimensions (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperGeometry {
    /// Finger length.
    pub l: f64,
    /// Finger thickness.
    pub t: f64,
    /// Finger width.
    pub w: f64,
    /// Maximum opening.
    pub d: f64,
}

impl Default for GripperGeometry {
    fn default() -> Self {
        Self {
            l: 0.06,
            t: 0.01,
            w: 0.025,
            d: 0.10,
        }
    }
}

impl GripperGeometry {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.l, self.t, self.w, self.d]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive || self.d <= self.t {
            return Err(Error::InvalidParameter(format!(
                "gripper needs positive l, t, w, d with d > t (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisChoice {
    Major,
    Minor,
}

/// Stable identity of a hypothesis; also the deterministic merge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HandleId {
    pub segment_id: usize,
    pub axis_choice: AxisChoice,
    pub center_index: usize,
}

/// h = (c, f̂, n̂, â, r) plus the clearances measured on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandleHypothesis {
    pub id: HandleId,
    pub c: Vec3,
    /// Surface normal, facing the camera.
    pub n: Vec3,
    /// Closing axis.
    pub a: Vec3,
    pub f: Vec3,
    pub r: f64,
    pub gap_plus: f64,
    pub gap_minus: f64,
}

impl HandleHypothesis {
    pub fn frame(&self) -> DarbouxFrame {
        DarbouxFrame {
            n: self.n,
            a: self.a,
            f: self.f,
        }
    }
}

/// Image line `p0 + t·u`, fitted by total least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLine {
    pub p0: Vec2,
    pub u: Vec2,
    pub inlier_count: usize,
    /// RMS orthogonal residual (px).
    pub rms: f64,
}

/// A hypothesis that passed every filter, with its raw cost inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatedHandle {
    pub hypothesis: HandleHypothesis,
    pub line_plus: BoundaryLine,
    pub line_minus: BoundaryLine,
    /// |u₊·u₋|.
    pub a_b_raw: f64,
    /// |â_img·u_avg|.
    pub a_axis_raw: f64,
    /// The closing axis projects to (almost) a point in the image.
    pub axis_degenerate: bool,
}
