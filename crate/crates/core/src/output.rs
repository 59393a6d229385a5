//! The `handles.json` document written by `detect` and read by `viz`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::grasp::{BoundaryLine, HandleId, StageFlags};
use crate::ranking::{CostFeatures, RankedHandle};
use crate::raster::Pixel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub plus: f64,
    pub minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineOut {
    pub p0: Vec2,
    pub u: Vec2,
}

impl From<&BoundaryLine> for LineOut {
    fn from(l: &BoundaryLine) -> Self {
        Self { p0: l.p0, u: l.u }
    }
}

/// Rim pixels kept as boundary evidence, as `[x, y]` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub plus: Vec<[usize; 2]>,
    pub minus: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandleOut {
    pub id: HandleId,
    pub center: Vec3,
    pub n: Vec3,
    pub a: Vec3,
    pub f: Vec3,
    pub r: f64,
    pub gaps: Gaps,
    /// `[plus, minus]`.
    pub lines: [LineOut; 2],
    pub features: CostFeatures,
    pub f_c: f64,
    pub rank: usize,
    pub stage_flags: StageFlags,
    #[serde(default)]
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandlesFile {
    pub frame_id: String,
    pub handles: Vec<HandleOut>,
}

fn xy(p: &[Pixel]) -> Vec<[usize; 2]> {
    p.iter().map(|p| [p.col, p.row]).collect()
}

impl HandlesFile {
    /// The top-k handles of `det`, best first.
    pub fn from_detection(frame_id: &str, det: &Detection) -> Self {
        let handles = det.top().iter().map(|rh| handle_out(det, rh)).collect();
        Self {
            frame_id: frame_id.to_string(),
            handles,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("handles are serializable") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn handle_out(det: &Detection, rh: &RankedHandle) -> HandleOut {
    let h = &rh.handle.hypothesis;
    let rec = det.records.iter().find(|r| r.hypothesis.id == h.id);
    let evidence = rec
        .and_then(|r| r.evidence.as_ref())
        .map(|(p, m)| Evidence {
            plus: xy(p),
            minus: xy(m),
        })
        .unwrap_or_default();
    HandleOut {
        id: h.id,
        center: h.c,
        n: h.n,
        a: h.a,
        f: h.f,
        r: h.r,
        gaps: Gaps {
            plus: h.gap_plus,
            minus: h.gap_minus,
        },
        lines: [(&rh.handle.line_plus).into(), (&rh.handle.line_minus).into()],
        features: rh.features,
        f_c: rh.f_c,
        rank: rh.rank,
        stage_flags: rec.map(|r| r.flags).unwrap_or_default(),
        evidence,
    }
}
