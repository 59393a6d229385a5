use serde::{Deserialize, Serialize};

use super::{EdgeKind, EdgeMap};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::raster::{Grid, N8};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthEdgeParams {
    /// Occlusion threshold on |Δz| between 8-neighbors (m).
    pub depth_jump: f64,
    /// Crease threshold on the normal angle between 8-neighbors (radians).
    pub normal_jump: f64,
}

impl Default for DepthEdgeParams {
    fn default() -> Self {
        Self {
            depth_jump: 0.02,
            normal_jump: 35f64.to_radians(),
        }
    }
}

/// Occlusion and crease edges of an organized cloud.
///
/// A valid pixel is an edge if some 8-neighbor is depth-invalid, differs in
/// depth by more than `depth_jump`, or (when both normals are valid) differs
/// in normal direction by more than `normal_jump`. The pair test is symmetric,
/// so both pixels of an offending valid pair are flagged.
pub fn depth_edges(frame: &Frame, params: DepthEdgeParams) -> Result<EdgeMap> {
    let nf = frame
        .normals
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("depth edges need normals".into()))?;
    let cos_jump = params.normal_jump.cos();
    let mask = Grid::from_fn(frame.width(), frame.height(), |p| {
        if !frame.valid[p] {
            return false;
        }
        N8.iter().any(|&(dr, dc)| {
            let Some(q) = frame.valid.offset(p, dr, dc) else {
                return false;
            };
            if !frame.valid[q] {
                return true;
            }
            if (frame.depth[p] - frame.depth[q]).abs() > params.depth_jump {
                return true;
            }
            nf.valid[p] && nf.valid[q] && nf.normals[p].dot(&nf.normals[q]) < cos_jump
        })
    });
    Ok(EdgeMap {
        kind: EdgeKind::Depth,
        mask,
    })
}
