//! Detector configuration as a single TOML document. Angles are in degrees
//! in the file and converted to radians for the pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::edges::{CannyParams, DepthEdgeParams};
use crate::error::{Error, Result};
use crate::frame::NormalParams;
use crate::grasp::{GraspParams, GripperGeometry};
use crate::ranking::CostWeights;
use crate::segmentation::RegionParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    pub enabled: bool,
    /// Pixels.
    pub spatial_sigma: f64,
    /// Meters.
    pub range_sigma: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            spatial_sigma: 2.0,
            range_sigma: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub smoothness_deg: f64,
    pub min_size: usize,
    pub max_step: f64,
    pub rim_extension: usize,
    pub rim_tolerance: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            smoothness_deg: 4.0,
            min_size: 300,
            max_step: 0.01,
            rim_extension: 6,
            rim_tolerance: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthEdgeConfig {
    pub depth_jump: f64,
    pub normal_jump_deg: f64,
}

impl Default for DepthEdgeConfig {
    fn default() -> Self {
        Self {
            depth_jump: 0.02,
            normal_jump_deg: 35.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspConfig {
    pub stride: f64,
    pub max_centers: usize,
    /// Half-depth of the finger column; 0 means the finger length.
    pub clearance_depth: f64,
    pub rim_tolerance: f64,
    pub sphere_factor: f64,
    pub min_slab_points: usize,
    pub match_radius: usize,
    pub theta_r_deg: f64,
    pub theta_axis_deg: f64,
    pub axis_check: bool,
    pub occlusion_margin: f64,
    pub support_factor: f64,
    pub dedup_distance: f64,
    pub dedup_angle_deg: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        let p = GraspParams::default();
        Self {
            stride: p.stride,
            max_centers: p.max_centers,
            clearance_depth: 0.0,
            rim_tolerance: p.rim_tolerance,
            sphere_factor: p.sphere_factor,
            min_slab_points: p.min_slab_points,
            match_radius: p.match_radius,
            theta_r_deg: 10.0,
            theta_axis_deg: 15.0,
            axis_check: p.axis_check,
            occlusion_margin: p.occlusion_margin,
            support_factor: p.support_factor,
            dedup_distance: p.dedup_distance,
            dedup_angle_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub top_k: usize,
}

impl Default for RankingConfig {
    fn default() -> Self {
        let w = CostWeights::default();
        Self {
            w1: w.w1,
            w2: w.w2,
            w3: w.w3,
            top_k: 5,
        }
    }
}

/// Every tunable of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub gripper: GripperGeometry,
    pub smoothing: SmoothingConfig,
    pub normals: NormalParams,
    pub segmentation: SegmentationConfig,
    pub canny: CannyParams,
    pub depth_edges: DepthEdgeConfig,
    pub grasp: GraspConfig,
    pub ranking: RankingConfig,
}

impl DetectConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        self.gripper.validate()?;
        self.cost_weights().validate()?;
        let g = &self.grasp;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(g.stride > 0.0) || g.max_centers == 0 {
            return bad("grasp.stride must be positive and grasp.max_centers at least 1");
        }
        for (name, v) in [
            ("theta_r_deg", g.theta_r_deg),
            ("theta_axis_deg", g.theta_axis_deg),
            ("dedup_angle_deg", g.dedup_angle_deg),
        ] {
            if !(v > 0.0 && v < 90.0) {
                return Err(Error::Config(format!("grasp.{name} must lie in (0, 90)")));
            }
        }
        if g.rim_tolerance < 0.0 || g.occlusion_margin < 0.0 || g.clearance_depth < 0.0 || g.dedup_distance < 0.0 {
            return bad("grasp distances must be non-negative");
        }
        if !(self.segmentation.smoothness_deg > 0.0 && self.segmentation.smoothness_deg < 90.0) {
            return bad("segmentation.smoothness_deg must lie in (0, 90)");
        }
        if self.ranking.top_k == 0 {
            return bad("ranking.top_k must be at least 1");
        }
        Ok(())
    }

    pub fn region_params(&self) -> RegionParams {
        RegionParams {
            smoothness: self.segmentation.smoothness_deg.to_radians(),
            min_size: self.segmentation.min_size,
            max_step: self.segmentation.max_step,
            rim_extension: self.segmentation.rim_extension,
            rim_tolerance: self.segmentation.rim_tolerance,
            roi: None,
        }
    }

    pub fn depth_edge_params(&self) -> DepthEdgeParams {
        DepthEdgeParams {
            depth_jump: self.depth_edges.depth_jump,
            normal_jump: self.depth_edges.normal_jump_deg.to_radians(),
        }
    }

    pub fn grasp_params(&self) -> GraspParams {
        let g = &self.grasp;
        GraspParams {
            stride: g.stride,
            max_centers: g.max_centers,
            clearance_depth: (g.clearance_depth > 0.0).then_some(g.clearance_depth),
            rim_tolerance: g.rim_tolerance,
            sphere_factor: g.sphere_factor,
            min_slab_points: g.min_slab_points,
            match_radius: g.match_radius,
            theta_r: g.theta_r_deg.to_radians(),
            theta_axis: g.theta_axis_deg.to_radians(),
            axis_check: g.axis_check,
            occlusion_margin: g.occlusion_margin,
            support_factor: g.support_factor,
            dedup_distance: g.dedup_distance,
            dedup_angle: g.dedup_angle_deg.to_radians(),
        }
    }

    pub fn cost_weights(&self) -> CostWeights {
        CostWeights {
            w1: self.ranking.w1,
            w2: self.ranking.w2,
            w3: self.ranking.w3,
        }
    }
}

/// Loads a gripper description (`l`, `t`, `w`, `d` in meters) from TOML.
pub fn load_gripper(path: &Path) -> Result<GripperGeometry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let g: GripperGeometry = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    g.validate()?;
    Ok(g)
}
