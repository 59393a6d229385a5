//! Geometric matching of detected handles against ground truth, and the
//! staged precision report.

use serde::{Deserialize, Serialize};

use crate::detect::{Detection, StageCounts};
use crate::error::{Error, Result};
use crate::geometry::{axis_angle, Vec3};
use crate::synth::{GroundTruth, GtHandle};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchCriteria {
    /// Center distance (m).
    pub center: f64,
    /// Axis angle, sign-free (degrees).
    pub axis_deg: f64,
    /// Allowed |2r − width| as a fraction of the ground-truth width.
    pub width_tolerance: f64,
}

impl Default for MatchCriteria {
    fn default() -> Self {
        Self {
            center: 0.02,
            axis_deg: 15.0,
            width_tolerance: 0.25,
        }
    }
}

impl MatchCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.center > 0.0 && self.axis_deg > 0.0 && self.width_tolerance > 0.0) {
            return Err(Error::Config(format!("match criteria must be positive (got {self:?})")));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// The parts of a prediction that matching looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub c: Vec3,
    pub a: Vec3,
    pub r: f64,
}

pub fn matches_gt(pred: &Prediction, gt: &GtHandle, crit: &MatchCriteria) -> bool {
    (pred.c - gt.center).norm() <= crit.center
        && axis_angle(&pred.a, &gt.a) <= crit.axis_deg.to_radians()
        && (2.0 * pred.r - gt.width).abs() <= crit.width_tolerance * gt.width
}

/// True iff some ground-truth handle matches `pred`.
pub fn match_any(pred: &Prediction, gts: &[GtHandle], crit: &MatchCriteria) -> bool {
    gts.iter().any(|g| matches_gt(pred, g, crit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub matched: usize,
    pub total: usize,
    /// 1 when there are no predictions.
    pub precision: f64,
    /// Set when there were no predictions.
    pub vacuous: bool,
}

impl Precision {
    pub fn from_counts(matched: usize, total: usize) -> Self {
        Self {
            matched,
            total,
            precision: if total == 0 { 1.0 } else { matched as f64 / total as f64 },
            vacuous: total == 0,
        }
    }

    fn add(&self, other: &Self) -> Self {
        Self::from_counts(self.matched + other.matched, self.total + other.total)
    }
}

pub fn precision(preds: &[Prediction], gts: &[GtHandle], crit: &MatchCriteria) -> Precision {
    let matched = preds.iter().filter(|p| match_any(p, gts, crit)).count();
    Precision::from_counts(matched, preds.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagePrecision {
    pub first_stage: Precision,
    pub after_parallel: Precision,
    /// Every unique survivor.
    pub overall: Precision,
    /// The `top_k` best-ranked survivors.
    pub top_k: Precision,
}

impl StagePrecision {
    fn add(&self, o: &Self) -> Self {
        Self {
            first_stage: self.first_stage.add(&o.first_stage),
            after_parallel: self.after_parallel.add(&o.after_parallel),
            overall: self.overall.add(&o.overall),
            top_k: self.top_k.add(&o.top_k),
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.first_stage.precision <= self.after_parallel.precision
            && self.after_parallel.precision <= self.overall.precision
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub scene: String,
    pub gt_handles: usize,
    pub counts: StageCounts,
    pub precision: StagePrecision,
}

/// Stage predictions of a detection: provisional hypotheses after the
/// clearance test, line-validated ones, unique survivors, and the top k.
pub fn stage_predictions(det: &Detection) -> [Vec<Prediction>; 4] {
    let pred = |h: &crate::grasp::HandleHypothesis| Prediction { c: h.c, a: h.a, r: h.r };
    let first = det
        .records
        .iter()
        .filter(|r| r.flags.first_stage())
        .map(|r| pred(&r.first_stage_hypothesis()))
        .collect();
    let after = det
        .records
        .iter()
        .filter(|r| r.flags.after_parallel())
        .map(|r| pred(&r.hypothesis))
        .collect();
    let overall = det.ranked.iter().map(|r| pred(&r.handle.hypothesis)).collect();
    let top = det.top().iter().map(|r| pred(&r.handle.hypothesis)).collect();
    [first, after, overall, top]
}

pub fn evaluate_detection(det: &Detection, gt: &GroundTruth, crit: &MatchCriteria) -> SceneReport {
    let [first, after, overall, top] = stage_predictions(det);
    let p = |v: &[Prediction]| precision(v, &gt.handles, crit);
    SceneReport {
        scene: gt.scene.clone(),
        gt_handles: gt.handles.len(),
        counts: det.counts,
        precision: StagePrecision {
            first_stage: p(&first),
            after_parallel: p(&after),
            overall: p(&overall),
            top_k: p(&top),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub criteria: MatchCriteria,
    pub counts: StageCounts,
    /// Pooled over all scenes.
    pub precision: StagePrecision,
    pub overall_precision: f64,
    pub monotone: bool,
    /// Sorted by scene name.
    pub scenes: Vec<SceneReport>,
}

impl EvalReport {
    pub fn aggregate(criteria: MatchCriteria, mut scenes: Vec<SceneReport>) -> Self {
        scenes.sort_by(|a, b| a.scene.cmp(&b.scene));
        let zero = Precision::from_counts(0, 0);
        let mut precision = StagePrecision {
            first_stage: zero,
            after_parallel: zero,
            overall: zero,
            top_k: zero,
        };
        let mut counts = StageCounts::default();
        for s in &scenes {
            precision = precision.add(&s.precision);
            counts.hypotheses += s.counts.hypotheses;
            counts.first_stage += s.counts.first_stage;
            counts.after_parallel += s.counts.after_parallel;
            counts.overall += s.counts.overall;
        }
        Self {
            criteria,
            counts,
            precision,
            overall_precision: precision.overall.precision,
            monotone: precision.is_monotone(),
            scenes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }
}
