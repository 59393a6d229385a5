//! End-to-end handle detection on one frame.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::DetectConfig;
use crate::edges::{canny, depth_edges, EdgeMap, EdgeSupport};
use crate::error::Result;
use crate::frame::{estimate_normals, smooth_cloud, Frame};
use crate::geometry::axis_angle;
use crate::grasp::{
    candidates, evaluate_candidate, AxisChoice, GraspContext, GripperGeometry, HypothesisRecord, Rejection,
    ValidatedHandle,
};
use crate::ranking::{compute_features, order, rank, score, RankedHandle};
use crate::segmentation::{region_grow, segment_features, SegmentFeatures, Segmentation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub id: usize,
    pub size: usize,
    pub features: Option<SegmentFeatures>,
    /// Wider than the support threshold in both directions; not probed.
    pub support: bool,
}

/// Hypotheses surviving each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub hypotheses: usize,
    pub first_stage: usize,
    pub after_parallel: usize,
    pub overall: usize,
}

/// Wall-clock time per phase (ms).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub preprocess: f64,
    pub segmentation: f64,
    pub edges: f64,
    pub hypotheses: f64,
    pub ranking: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct Detection {
    /// Every surviving unique handle, best first.
    pub ranked: Vec<RankedHandle>,
    /// At most `top_k` of `ranked`.
    pub top_k: usize,
    /// One record per evaluated hypothesis, in handle-id order.
    pub records: Vec<HypothesisRecord>,
    pub segments: Vec<SegmentSummary>,
    pub counts: StageCounts,
    pub timings: Timings,
    /// Frame with normals, as used by the pipeline.
    pub frame: Frame,
    pub segmentation: Segmentation,
    pub intensity_edges: EdgeMap,
    pub depth_edges: EdgeMap,
}

impl Detection {
    pub fn top(&self) -> &[RankedHandle] {
        &self.ranked[..self.ranked.len().min(self.top_k)]
    }

    pub fn handles(&self) -> Vec<ValidatedHandle> {
        self.ranked.iter().map(|r| r.handle).collect()
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline. `gripper` overrides the one in `config`.
pub fn detect_handles(frame: &Frame, gripper: &GripperGeometry, config: &DetectConfig) -> Result<Detection> {
    let mut config = *config;
    config.gripper = *gripper;
    config.validate()?;
    let start = Instant::now();
    let mut timings = Timings::default();

    let t = Instant::now();
    let mut work = if config.smoothing.enabled {
        smooth_cloud(frame, config.smoothing.spatial_sigma, config.smoothing.range_sigma)?
    } else {
        frame.clone()
    };
    if work.normals.is_none() {
        work = estimate_normals(&work, config.normals)?;
    }
    timings.preprocess = ms(t);

    let t = Instant::now();
    let seg = region_grow(&work, &config.region_params())?;
    let params = config.grasp_params();
    let support_extent = params.support_factor * gripper.d;
    let segments: Vec<SegmentSummary> = seg
        .segments
        .iter()
        .map(|s| {
            let features = segment_features(&work, s).ok();
            SegmentSummary {
                id: s.id,
                size: s.len(),
                features,
                support: features.is_some_and(|f| f.extent_major > support_extent && f.extent_minor > support_extent),
            }
        })
        .collect();
    timings.segmentation = ms(t);

    let t = Instant::now();
    let ec = canny(&work.luminance(), config.canny)?;
    let ed = depth_edges(&work, config.depth_edge_params())?;
    let support = EdgeSupport::new(&ec, &ed, params.match_radius)?;
    timings.edges = ms(t);

    let t = Instant::now();
    let ctx = GraspContext {
        frame: &work,
        labels: &seg.labels,
        support: &support,
        gripper: *gripper,
        params,
    };
    let mut records = Vec::new();
    for (s, summary) in seg.segments.iter().zip(&segments) {
        let Some(features) = summary.features.filter(|_| !summary.support) else {
            continue;
        };
        for choice in [AxisChoice::Major, AxisChoice::Minor] {
            let Ok(cands) = candidates(&work, s, &features, choice, gripper, &params) else {
                continue;
            };
            records.extend(cands.iter().map(|c| evaluate_candidate(&ctx, s, c)));
        }
    }
    timings.hypotheses = ms(t);

    let t = Instant::now();
    let ranked = dedup_and_rank(&mut records, &config);
    timings.ranking = ms(t);

    let counts = StageCounts {
        hypotheses: records.len(),
        first_stage: records.iter().filter(|r| r.flags.first_stage()).count(),
        after_parallel: records.iter().filter(|r| r.flags.after_parallel()).count(),
        overall: records.iter().filter(|r| r.flags.overall()).count(),
    };
    timings.total = ms(start);
    Ok(Detection {
        ranked,
        top_k: config.ranking.top_k,
        records,
        segments,
        counts,
        timings,
        frame: work,
        segmentation: seg,
        intensity_edges: ec,
        depth_edges: ed,
    })
}

/// Marks near-duplicate survivors, keeping the cheaper of each pair, and
/// ranks the rest. Costs for the duplicate test are computed over all
/// survivors; the final ranking is recomputed over the unique ones.
fn dedup_and_rank(records: &mut [HypothesisRecord], config: &DetectConfig) -> Vec<RankedHandle> {
    let params = config.grasp_params();
    let w = config.cost_weights();
    let idx: Vec<usize> = (0..records.len())
        .filter(|&i| records[i].validated().is_some())
        .collect();
    let handles: Vec<ValidatedHandle> = idx.iter().map(|&i| records[i].validated().expect("filtered")).collect();
    let feats = compute_features(&handles);
    let items: Vec<_> = feats.iter().zip(&handles).map(|(f, h)| (*f, h.hypothesis.id)).collect();
    let mut kept: Vec<usize> = Vec::new();
    for k in order(&items, &w) {
        let h = &handles[k].hypothesis;
        let dup = kept.iter().any(|&j| {
            let o = &handles[j].hypothesis;
            (h.c - o.c).norm() <= params.dedup_distance && axis_angle(&h.a, &o.a) <= params.dedup_angle
        });
        let rec = &mut records[idx[k]];
        if dup {
            rec.rejection = Some(Rejection::Duplicate);
        } else {
            rec.flags.unique = true;
            kept.push(k);
        }
    }
    debug_assert!(kept
        .windows(2)
        .all(|p| score(&feats[p[0]], &w) <= score(&feats[p[1]], &w)));
    kept.sort_unstable();
    let unique: Vec<ValidatedHandle> = kept.iter().map(|&k| handles[k]).collect();
    rank(&unique, &w, usize::MAX)
}
