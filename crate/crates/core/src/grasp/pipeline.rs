use serde::{Deserialize, Serialize};

use super::{
    axis_perpendicularity_check, darboux_frame, extract_boundary_lines, gap_check, handle_radius, occlusion_filter,
    parallelism_check, project_axis, AxisChoice, BoundaryLine, DarbouxFrame, GapCheck, GapParams, GripperGeometry,
    HandleHypothesis, HandleId, OcclusionCheck, ValidatedHandle,
};
use crate::edges::{EdgeSupport, SplitAxis};
use crate::error::Result;
use crate::frame::Frame;
use crate::geometry::{Vec2, Vec3};
use crate::raster::{Grid, Pixel};
use crate::segmentation::{Segment, SegmentFeatures};

/// Hypothesis generation and validation parameters. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspParams {
    /// Spacing of candidate centers along f̂ (m).
    pub stride: f64,
    pub max_centers: usize,
    /// Half-extent of the finger column along n̂; the finger length if unset.
    pub clearance_depth: Option<f64>,
    pub rim_tolerance: f64,
    /// Search sphere radius as a multiple of the opening d.
    pub sphere_factor: f64,
    pub min_slab_points: usize,
    pub match_radius: usize,
    pub theta_r: f64,
    pub theta_axis: f64,
    pub axis_check: bool,
    pub occlusion_margin: f64,
    /// Segments wider than this multiple of d in both directions are supports.
    pub support_factor: f64,
    pub dedup_distance: f64,
    pub dedup_angle: f64,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self {
            stride: 0.02,
            max_centers: 25,
            clearance_depth: None,
            rim_tolerance: 0.003,
            sphere_factor: 1.5,
            min_slab_points: 10,
            match_radius: 2,
            theta_r: 10f64.to_radians(),
            theta_axis: 15f64.to_radians(),
            axis_check: true,
            occlusion_margin: 0.005,
            support_factor: 2.0,
            dedup_distance: 0.01,
            dedup_angle: 10f64.to_radians(),
        }
    }
}

impl GraspParams {
    pub fn gap_params(&self, g: &GripperGeometry) -> GapParams {
        GapParams {
            clearance_depth: self.clearance_depth.unwrap_or(g.l),
            rim_tolerance: self.rim_tolerance,
            sphere_radius: self.sphere_factor * g.d,
        }
    }
}

/// Shared read-only inputs for evaluating hypotheses on one frame.
pub struct GraspContext<'a> {
    pub frame: &'a Frame,
    pub labels: &'a Grid<Option<u32>>,
    pub support: &'a EdgeSupport,
    pub gripper: GripperGeometry,
    pub params: GraspParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: HandleId,
    pub c: Vec3,
    pub frame: DarbouxFrame,
    /// Half the slab's extent along â.
    pub r: f64,
    /// Offset of the slab from the segment centroid along f̂ (m).
    pub offset: f64,
}

/// Candidate centers on one segment for one axis choice.
///
/// Offsets along f̂ start at the centroid and step outward by `stride`
/// (0, +1, −1, +2, …) while a finger-wide slab still fits inside the segment.
/// Each center sits mid-way across its slab's extent along â, at the slab's
/// mean height along n̂.
pub fn candidates(
    frame: &Frame,
    seg: &Segment,
    features: &SegmentFeatures,
    choice: AxisChoice,
    gripper: &GripperGeometry,
    params: &GraspParams,
) -> Result<Vec<Candidate>> {
    let fr = darboux_frame(features, choice)?;
    let origin = features.centroid;
    let local: Vec<Vec3> = seg.members().map(|p| fr.local(&origin, &frame.points[p])).collect();
    let (fmin, fmax) = local
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), l| (lo.min(l.y), hi.max(l.y)));
    let hw = gripper.w / 2.0;
    let (lo, hi) = (fmin + hw, fmax - hw);

    let mut offsets = Vec::new();
    if lo > hi {
        offsets.push((fmin + fmax) / 2.0);
    } else {
        let base = 0f64.clamp(lo, hi);
        offsets.push(base);
        let mut k = 1;
        while offsets.len() < params.max_centers {
            let mut added = false;
            for s in [base + k as f64 * params.stride, base - k as f64 * params.stride] {
                if s >= lo && s <= hi && offsets.len() < params.max_centers {
                    offsets.push(s);
                    added = true;
                }
            }
            if !added {
                break;
            }
            k += 1;
        }
    }

    let mut out = Vec::new();
    for (center_index, &s) in offsets.iter().enumerate() {
        let (mut amin, mut amax, mut nsum, mut count) = (f64::MAX, f64::MIN, 0.0, 0usize);
        for l in &local {
            if (l.y - s).abs() <= hw {
                amin = amin.min(l.x);
                amax = amax.max(l.x);
                nsum += l.z;
                count += 1;
            }
        }
        if count < params.min_slab_points.max(1) {
            continue;
        }
        out.push(Candidate {
            id: HandleId {
                segment_id: seg.id,
                axis_choice: choice,
                center_index,
            },
            c: fr.world(&origin, (amin + amax) / 2.0, s, nsum / count as f64),
            frame: fr,
            r: (amax - amin) / 2.0,
            offset: s,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    TooWide,
    Gap,
    Boundary,
    LineFit,
    NotParallel,
    AxisSkew,
    Width,
    Occluded,
    Duplicate,
}

/// Outcome of each validation stage for one hypothesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFlags {
    pub gap: bool,
    pub boundary: bool,
    pub parallel: bool,
    pub axis: bool,
    pub width: bool,
    pub occlusion: bool,
    pub unique: bool,
}

impl StageFlags {
    /// Survived the clearance test.
    pub fn first_stage(&self) -> bool {
        self.gap
    }

    /// Survived boundary extraction and the line tests.
    pub fn after_parallel(&self) -> bool {
        self.gap && self.boundary && self.parallel && self.axis && self.width
    }

    /// Survived everything, including occlusion and de-duplication.
    pub fn overall(&self) -> bool {
        self.after_parallel() && self.occlusion && self.unique
    }
}

/// Diagnostics of one evaluated hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    /// Latest state of the hypothesis; `r` is the line-based radius once
    /// lines exist, the provisional one before.
    pub hypothesis: HandleHypothesis,
    pub r_provisional: f64,
    pub flags: StageFlags,
    pub rejection: Option<Rejection>,
    pub gap: GapCheck,
    pub boundary_counts: Option<(usize, usize)>,
    /// Retained rim pixels per side (E_v).
    #[serde(skip)]
    pub evidence: Option<(Vec<Pixel>, Vec<Pixel>)>,
    pub lines: Option<(BoundaryLine, BoundaryLine)>,
    pub a_b_raw: Option<f64>,
    pub a_axis_raw: Option<f64>,
    pub axis_degenerate: bool,
    pub occlusion: Option<OcclusionCheck>,
}

impl HypothesisRecord {
    /// The hypothesis as seen after the first stage (provisional radius).
    pub fn first_stage_hypothesis(&self) -> HandleHypothesis {
        HandleHypothesis {
            r: self.r_provisional,
            ..self.hypothesis
        }
    }

    /// Passed the line tests and the occlusion filter.
    pub fn validated(&self) -> Option<ValidatedHandle> {
        if !(self.flags.after_parallel() && self.flags.occlusion) {
            return None;
        }
        let (line_plus, line_minus) = self.lines?;
        Some(ValidatedHandle {
            hypothesis: self.hypothesis,
            line_plus,
            line_minus,
            a_b_raw: self.a_b_raw?,
            a_axis_raw: self.a_axis_raw?,
            axis_degenerate: self.axis_degenerate,
        })
    }
}

/// Rim pixels of `seg` that can act as finger contacts for `cand`: inside the
/// finger-wide slab and in the outer half of the handle along â.
pub fn contact_rim(frame: &Frame, seg: &Segment, cand: &Candidate, finger_width: f64) -> Vec<Pixel> {
    seg.boundary
        .iter()
        .copied()
        .filter(|&p| {
            let l = cand.frame.local(&cand.c, &frame.points[p]);
            l.y.abs() <= finger_width / 2.0 && l.x.abs() >= cand.r / 2.0
        })
        .collect()
}

/// Runs the validation chain on one candidate. Stops at the first failing
/// stage; later flags stay false.
pub fn evaluate_candidate(ctx: &GraspContext, seg: &Segment, cand: &Candidate) -> HypothesisRecord {
    let g = &ctx.gripper;
    let p = &ctx.params;
    let gap = gap_check(ctx.frame, &cand.c, &cand.frame, cand.r, g, &p.gap_params(g));
    let mut rec = HypothesisRecord {
        hypothesis: HandleHypothesis {
            id: cand.id,
            c: cand.c,
            n: cand.frame.n,
            a: cand.frame.a,
            f: cand.frame.f,
            r: cand.r,
            gap_plus: gap.gap_plus,
            gap_minus: gap.gap_minus,
        },
        r_provisional: cand.r,
        flags: StageFlags::default(),
        rejection: None,
        gap,
        boundary_counts: None,
        evidence: None,
        lines: None,
        a_b_raw: None,
        a_axis_raw: None,
        axis_degenerate: false,
        occlusion: None,
    };
    if !gap.pass {
        rec.rejection = Some(if gap.too_wide {
            Rejection::TooWide
        } else {
            Rejection::Gap
        });
        return rec;
    }
    rec.flags.gap = true;

    let k = &ctx.frame.intrinsics;
    let (Some(a_img), Some((cx, cy))) = (project_axis(k, &cand.c, &cand.frame.a), k.project(&cand.c)) else {
        rec.rejection = Some(Rejection::Boundary);
        return rec;
    };
    let rim = contact_rim(ctx.frame, seg, cand, g.w);
    let split = SplitAxis {
        center: Vec2::new(cx, cy),
        dir: a_img,
    };
    let vb = match ctx.support.merge(&rim, split) {
        Ok(vb) => vb,
        Err(_) => {
            rec.rejection = Some(Rejection::Boundary);
            return rec;
        }
    };
    rec.boundary_counts = Some((vb.plus.len(), vb.minus.len()));
    rec.flags.boundary = true;
    let lines = extract_boundary_lines(&vb);
    rec.evidence = Some((vb.plus, vb.minus));

    let Ok((lp, lm)) = lines else {
        rec.rejection = Some(Rejection::LineFit);
        return rec;
    };
    rec.lines = Some((lp, lm));

    let (parallel, a_b_raw) = parallelism_check(&lp, &lm, p.theta_r);
    rec.a_b_raw = Some(a_b_raw);
    let axis = axis_perpendicularity_check(Some(a_img), &lp, &lm, p.theta_axis);
    rec.a_axis_raw = Some(axis.raw);
    rec.axis_degenerate = axis.degenerate;
    if !parallel {
        rec.rejection = Some(Rejection::NotParallel);
        return rec;
    }
    rec.flags.parallel = true;
    if p.axis_check && !axis.pass {
        rec.rejection = Some(Rejection::AxisSkew);
        return rec;
    }
    rec.flags.axis = true;

    match handle_radius(k, &cand.c, &cand.frame.n, &lp, &lm) {
        Some(r) if r <= g.d / 2.0 => rec.hypothesis.r = r,
        _ => {
            rec.rejection = Some(Rejection::Width);
            return rec;
        }
    }
    rec.flags.width = true;

    let occ = occlusion_filter(ctx.frame, ctx.labels, &rec.hypothesis, g, p.occlusion_margin);
    rec.occlusion = Some(occ);
    if !occ.pass {
        rec.rejection = Some(Rejection::Occluded);
        return rec;
    }
    rec.flags.occlusion = true;
    rec
}
