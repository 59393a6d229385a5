//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so the lines are always shown.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use edgegrasp::edges::{merge_boundary, EdgeKind, EdgeMap, SplitAxis};
use edgegrasp::eval::{evaluate_detection, EvalReport, MatchCriteria};
use edgegrasp::grasp::{
    axis_perpendicularity_check, contact_rim, extract_boundary_lines, fit_line, frame_from_axes, gap_check,
    occlusion_filter, parallelism_check, project_axis, AxisChoice, BoundaryLine, Candidate, DarbouxFrame, GraspParams,
    HandleHypothesis, HandleId,
};
use edgegrasp::ranking::{rank, CostWeights};
use edgegrasp::raster::{Grid, Pixel};
use edgegrasp::segmentation::segment_features;
use edgegrasp::synth::{render, scene_by_name, standard_suite, Rendered, SceneSpec};
use edgegrasp::{detect_handles, DetectConfig, Detection, Frame, GripperGeometry, ValidatedHandle, Vec2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn detect(frame: &Frame) -> Detection {
    let cfg = DetectConfig::default();
    detect_handles(frame, &cfg.gripper, &cfg).expect("detection runs")
}

/// Gaps by visiting every valid pixel of the frame.
fn brute_gaps(frame: &Frame, h: &HandleHypothesis, r: f64, g: &GripperGeometry, p: &GraspParams) -> (bool, [f64; 2]) {
    let gp = p.gap_params(g);
    let cap = g.d / 2.0;
    if r > cap {
        return (false, [0.0, 0.0]);
    }
    let mut gaps = [cap, cap];
    for px in frame.points.pixels().filter(|&px| frame.valid[px]) {
        let q = frame.points[px];
        let d = q - h.c;
        let (a, f, n) = (d.dot(&h.a), d.dot(&h.f), d.dot(&h.n));
        if f.abs() <= g.w / 2.0
            && n.abs() <= gp.clearance_depth
            && a.abs() > r + gp.rim_tolerance
            && a.abs() <= r + cap
            && d.norm() <= gp.sphere_radius
        {
            let side = usize::from(a < 0.0);
            gaps[side] = gaps[side].min(a.abs() - r);
        }
    }
    (gaps[0] > g.t && gaps[1] > g.t, gaps)
}

/// Foreign points in the approach prism, by visiting every valid pixel.
fn brute_intruders(
    frame: &Frame,
    labels: &Grid<Option<u32>>,
    h: &HandleHypothesis,
    g: &GripperGeometry,
    m: f64,
) -> usize {
    let own = Some(h.id.segment_id as u32);
    frame
        .points
        .pixels()
        .filter(|&px| frame.valid[px] && labels[px] != own)
        .filter(|&px| {
            let d = frame.points[px] - h.c;
            let (a, f, n) = (d.dot(&h.a), d.dot(&h.f), d.dot(&h.n));
            a.abs() <= h.r + m && f.abs() <= g.w / 2.0 + m && n > m && n <= g.l + m
        })
        .count()
}

fn oracle_equivalence(suite: &[(SceneSpec, Rendered, Detection)], detect_ms: f64) -> Outcome {
    let t = Instant::now();
    let cfg = DetectConfig::default();
    let (g, p) = (cfg.gripper, cfg.grasp_params());
    let (mut gaps, mut prisms, mut bad) = (0, 0, Vec::new());
    for (spec, _, det) in suite {
        let labels = &det.segmentation.labels;
        for rec in &det.records {
            let first = rec.first_stage_hypothesis();
            let (pass, [gp, gm]) = brute_gaps(&det.frame, &first, rec.r_provisional, &g, &p);
            let got = gap_check(
                &det.frame,
                &first.c,
                &first.frame(),
                rec.r_provisional,
                &g,
                &p.gap_params(&g),
            );
            gaps += 1;
            if got.pass != pass || (got.gap_plus - gp).abs() > 1e-12 || (got.gap_minus - gm).abs() > 1e-12 {
                bad.push(format!("{} gap {:?}", spec.name, rec.hypothesis.id));
            }
            // Every hypothesis, not only those that reach the filter.
            let occ = occlusion_filter(&det.frame, labels, &rec.hypothesis, &g, p.occlusion_margin);
            let n = brute_intruders(&det.frame, labels, &rec.hypothesis, &g, p.occlusion_margin);
            prisms += 1;
            if occ.intruders != n || occ.pass != (n == 0) || rec.occlusion.is_some_and(|o| o != occ) {
                bad.push(format!("{} prism {:?}", spec.name, rec.hypothesis.id));
            }
        }
    }
    let secs = (detect_ms / 1e3) + t.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 60.0 && gaps > 0,
        format!(
            "{gaps} gap and {prisms} prism decisions on {} scenes, {} disagreements {:?}, {secs:.1} s (limit 60 s)",
            suite.len(),
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn staged_precision(suite: &[(SceneSpec, Rendered, Detection)]) -> Outcome {
    let crit = MatchCriteria::default();
    let reports = suite
        .iter()
        .map(|(_, r, det)| evaluate_detection(det, &r.truth, &crit))
        .collect();
    let rep = EvalReport::aggregate(crit, reports);
    let p = &rep.precision;
    outcome(
        rep.monotone && rep.overall_precision >= 0.90,
        format!(
            "first {}/{} = {:.3}, after parallel {}/{} = {:.3}, overall {}/{} = {:.3} (need monotone, overall >= 0.90)",
            p.first_stage.matched,
            p.first_stage.total,
            p.first_stage.precision,
            p.after_parallel.matched,
            p.after_parallel.total,
            p.after_parallel.precision,
            p.overall.matched,
            p.overall.total,
            p.overall.precision
        ),
    )
}

/// Segment holding most pixels of object `obj`.
fn object_segment(det: &Detection, r: &Rendered, obj: usize) -> usize {
    let mut best = (0, 0);
    for s in &det.segmentation.segments {
        let n = s.pixels.iter().filter(|&&p| r.truth.object_at(p) == Some(obj)).count();
        if n > best.1 {
            best = (s.id, n);
        }
    }
    best.0
}

fn pixel_of(frame: &Frame, c: &Vec3) -> Option<Pixel> {
    let (x, y) = frame.intrinsics.project(c)?;
    let (col, row) = (x.round(), y.round());
    (col >= 0.0 && row >= 0.0 && (col as usize) < frame.width() && (row as usize) < frame.height())
        .then(|| Pixel::new(row as usize, col as usize))
}

/// Lines and projected axis of a handle closing along `fr.a` on the
/// finger-wide slab through the centroid of segment `seg_id`.
fn probe(det: &Detection, seg_id: usize, fr: DarbouxFrame) -> Option<(BoundaryLine, BoundaryLine, Option<Vec2>)> {
    let g = GripperGeometry::default();
    let p = GraspParams::default();
    let seg = &det.segmentation.segments[seg_id];
    let origin = segment_features(&det.frame, seg).ok()?.centroid;
    let slab: Vec<Vec3> = seg
        .members()
        .map(|q| fr.local(&origin, &det.frame.points[q]))
        .filter(|l| l.y.abs() <= g.w / 2.0)
        .collect();
    let amin = slab.iter().map(|l| l.x).fold(f64::MAX, f64::min);
    let amax = slab.iter().map(|l| l.x).fold(f64::MIN, f64::max);
    let nmean = slab.iter().map(|l| l.z).sum::<f64>() / slab.len() as f64;
    let cand = Candidate {
        id: HandleId {
            segment_id: seg_id,
            axis_choice: AxisChoice::Major,
            center_index: 0,
        },
        c: fr.world(&origin, (amin + amax) / 2.0, 0.0, nmean),
        frame: fr,
        r: (amax - amin) / 2.0,
        offset: 0.0,
    };
    let k = &det.frame.intrinsics;
    let a_img = project_axis(k, &cand.c, &fr.a);
    let (cx, cy) = k.project(&cand.c)?;
    let split = SplitAxis {
        center: Vec2::new(cx, cy),
        dir: a_img?,
    };
    let rim = contact_rim(&det.frame, seg, &cand, g.w);
    let vb = merge_boundary(&rim, &det.intensity_edges, &det.depth_edges, p.match_radius, split).ok()?;
    let (lp, lm) = extract_boundary_lines(&vb).ok()?;
    Some((lp, lm, a_img))
}

fn failure_modes() -> Outcome {
    let camera_of = |spec: &SceneSpec| spec.camera.rotation().expect("valid camera").transpose();
    // Wedge: no accepted handle on its converging top.
    let spec = scene_by_name("wedge").expect("catalogue scene");
    let r = render(&spec).expect("renders");
    let det = detect(&r.frame);
    let up = camera_of(&spec) * Vec3::z();
    let on_top = det
        .ranked
        .iter()
        .filter(|rh| {
            let h = &rh.handle.hypothesis;
            pixel_of(&det.frame, &h.c).and_then(|p| r.truth.object_at(p)) == Some(0)
                && h.n.dot(&up) > 20f64.to_radians().cos()
        })
        .count();
    let wedge_ok = on_top == 0;

    // Lying cylinder: a closing axis skewed 35° off the circumference keeps
    // the silhouettes parallel but fails the axis test.
    let spec = scene_by_name("cylinder_lying").expect("catalogue scene");
    let r = render(&spec).expect("renders");
    let det = detect(&r.frame);
    let id = object_segment(&det, &r, 0);
    let feats = segment_features(&det.frame, &det.segmentation.segments[id]).expect("segment features");
    let axis = camera_of(&spec) * (spec.objects[0].pose.rotation() * Vec3::z());
    let around = feats.mean_normal.cross(&axis).normalize();
    let skew = 35f64.to_radians();
    let p = GraspParams::default();
    let probe_result = frame_from_axes(feats.mean_normal, around * skew.cos() + axis * skew.sin())
        .ok()
        .and_then(|fr| probe(&det, id, fr))
        .map(|(lp, lm, a_img)| {
            let parallel = parallelism_check(&lp, &lm, p.theta_r).0;
            (parallel, axis_perpendicularity_check(a_img, &lp, &lm, p.theta_axis))
        });
    let cylinder_ok = matches!(probe_result, Some((true, ax)) if !ax.pass && !ax.degenerate);
    outcome(
        wedge_ok && cylinder_ok,
        format!(
            "wedge top handles accepted: {on_top}; cylinder probe (parallel, axis raw, axis pass): {:?}",
            probe_result.map(|(par, ax)| (par, (ax.raw * 1e3).round() / 1e3, ax.pass))
        ),
    )
}

fn merge_levels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (w, h) = (48, 36);
    let mut bad = 0;
    for _ in 0..1000 {
        let density = rng.random_range(0.0..0.08);
        let mut maps = [
            EdgeMap::empty(EdgeKind::Intensity, w, h),
            EdgeMap::empty(EdgeKind::Depth, w, h),
        ];
        for m in &mut maps {
            for v in m.mask.as_mut_slice() {
                *v = rng.random_bool(density);
            }
        }
        let radius = rng.random_range(0..4usize);
        let es: Vec<Pixel> = (0..rng.random_range(1..120))
            .map(|_| Pixel::new(rng.random_range(0..h), rng.random_range(0..w)))
            .collect();
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let split = SplitAxis {
            center: Vec2::new(rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64)),
            dir: Vec2::new(theta.cos(), theta.sin()),
        };
        let edges: Vec<Pixel> = maps.iter().flat_map(|m| m.pixels()).collect();
        let level = |p: Pixel| -> u8 {
            edges
                .iter()
                .any(|q| q.row.abs_diff(p.row) <= radius && q.col.abs_diff(p.col) <= radius) as u8
        };
        let side = |p: Pixel| (Vec2::new(p.col as f64, p.row as f64) - split.center).dot(&split.dir);
        let plus: Vec<Pixel> = es.iter().copied().filter(|&p| level(p) == 1 && side(p) > 1.0).collect();
        let minus: Vec<Pixel> = es
            .iter()
            .copied()
            .filter(|&p| level(p) == 1 && side(p) < -1.0)
            .collect();
        match merge_boundary(&es, &maps[0], &maps[1], radius, split) {
            Ok(vb) => {
                let levels: Vec<u8> = es.iter().map(|&p| level(p)).collect();
                if vb.levels != levels || vb.plus != plus || vb.minus != minus {
                    bad += 1;
                }
            }
            Err(_) => {
                if plus.len() >= 2 && minus.len() >= 2 {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("1000 random cases, {bad} mismatches"))
}

fn residual(points: &[Vec2], p0: Vec2, u: Vec2) -> f64 {
    points
        .iter()
        .map(|p| {
            let d = p - p0;
            (d.x * u.y - d.y * u.x).powi(2)
        })
        .sum()
}

fn line_fit_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(3..200);
        let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let dir = Vec2::new(theta.cos(), theta.sin());
        let spread = rng.random_range(0.0..5.0);
        let origin = Vec2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
        let points: Vec<Vec2> = (0..n)
            .map(|_| {
                let t = rng.random_range(-50.0..50.0);
                let e = rng.random_range(-spread..=spread);
                origin + dir * t + Vec2::new(-dir.y, dir.x) * e
            })
            .collect();
        let Ok(line) = fit_line(&points) else {
            bad += 1;
            continue;
        };
        let fitted = residual(&points, line.p0, line.u);
        // For a fixed direction the best offset passes through the centroid.
        let centroid = points.iter().sum::<Vec2>() / n as f64;
        let best = (0..360)
            .map(|k| {
                let a = (k as f64 * 0.5).to_radians();
                residual(&points, centroid, Vec2::new(a.cos(), a.sin()))
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((fitted - best) / best.max(f64::MIN_POSITIVE));
        if fitted > best * (1.0 + 1e-9) {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("100 point sets, {bad} beaten by the 0.5 deg sweep (largest relative excess {worst:.2e})"),
    )
}

fn random_handle(rng: &mut ChaCha8Rng, i: usize) -> ValidatedHandle {
    let fr = frame_from_axes(-Vec3::z(), Vec3::x()).expect("valid axes");
    let line = BoundaryLine {
        p0: Vec2::zeros(),
        u: Vec2::x(),
        inlier_count: 10,
        rms: 0.0,
    };
    ValidatedHandle {
        hypothesis: HandleHypothesis {
            id: HandleId {
                segment_id: i,
                axis_choice: AxisChoice::Major,
                center_index: 0,
            },
            c: Vec3::new(0.0, 0.0, rng.random_range(0.5..1.5)),
            n: fr.n,
            a: fr.a,
            f: fr.f,
            r: 0.02,
            gap_plus: 0.02,
            gap_minus: 0.02,
        },
        line_plus: line,
        line_minus: line,
        a_b_raw: rng.random_range(0.95..=1.0),
        a_axis_raw: rng.random_range(0.0..0.26),
        axis_degenerate: false,
    }
}

fn position(handles: &[ValidatedHandle], w: &CostWeights, id: usize) -> usize {
    rank(handles, w, usize::MAX)
        .iter()
        .position(|r| r.handle.hypothesis.id.segment_id == id)
        .expect("present")
}

fn ranking_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut scaling, mut monotone) = (0, 0);
    for _ in 0..1000 {
        let n = rng.random_range(2..12);
        let handles: Vec<ValidatedHandle> = (0..n).map(|i| random_handle(&mut rng, i)).collect();
        let w = CostWeights {
            w1: rng.random_range(0.0..1.0),
            w2: rng.random_range(0.0..1.0),
            w3: rng.random_range(0.01..1.0),
        };
        let k = rng.random_range(0.01..100.0);
        let scaled = CostWeights {
            w1: w.w1 * k,
            w2: w.w2 * k,
            w3: w.w3 * k,
        };
        let best = rank(&handles, &w, 1)[0].handle.hypothesis.id;
        if rank(&handles, &scaled, 1)[0].handle.hypothesis.id != best {
            scaling += 1;
        }
        // Worsening one feature of one handle never improves its place.
        let i = rng.random_range(0..n);
        let before = position(&handles, &w, i);
        for feature in 0..3 {
            let mut worse = handles.clone();
            let h = &mut worse[i];
            match feature {
                0 => h.a_b_raw -= rng.random_range(0.0..0.05),
                1 => h.a_axis_raw += rng.random_range(0.0..0.1),
                _ => h.hypothesis.c.z += rng.random_range(0.0..0.5),
            }
            if position(&worse, &w, i) < before {
                monotone += 1;
            }
        }
    }
    outcome(
        scaling == 0 && monotone == 0,
        format!("1000 handle sets: {scaling} scaling violations, {monotone} monotonicity violations"),
    )
}

fn performance() -> Outcome {
    let spec = scene_by_name("clutter_1").expect("catalogue scene");
    let r = render(&spec).expect("renders");
    let valid = r.frame.valid_count();
    let cfg = DetectConfig::default();
    // Warm-up, then the best of three.
    let _ = detect(&r.frame);
    let best = (0..3)
        .map(|_| {
            let t = Instant::now();
            detect_handles(&r.frame, &cfg.gripper, &cfg).expect("detection runs");
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min);
    outcome(
        valid >= 50_000 && best <= 2.0,
        format!(
            "clutter_1 640x480 with {valid} valid points: {:.0} ms (limit 2000 ms)",
            best * 1e3
        ),
    )
}

fn run(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_edgegrasp"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism(dir: &Path) -> Outcome {
    let scenes = dir.join("scenes");
    let s = scenes.to_str().expect("utf-8 path");
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    let ok = run(&["synth", "--suite", "--out-dir", s])
        && run(&["eval", "--scenes-dir", s, "--report", a.to_str().expect("utf-8 path")])
        && run(&[
            "eval",
            "--scenes-dir",
            s,
            "--report",
            b.to_str().expect("utf-8 path"),
            "--jobs",
            "3",
        ]);
    if !ok {
        return outcome(false, "synth or eval failed");
    }
    let (ra, rb) = (
        std::fs::read(&a).unwrap_or_default(),
        std::fs::read(&b).unwrap_or_default(),
    );
    outcome(
        !ra.is_empty() && ra == rb,
        format!(
            "two eval runs, {} and {} bytes, identical: {}",
            ra.len(),
            rb.len(),
            ra == rb
        ),
    )
}

fn main() {
    let t = Instant::now();
    let suite: Vec<(SceneSpec, Rendered, Detection)> = standard_suite()
        .expect("catalogue renders")
        .into_iter()
        .map(|(s, r)| {
            let det = detect(&r.frame);
            (s, r, det)
        })
        .collect();
    let detect_ms = t.elapsed().as_secs_f64() * 1e3;
    let dir = tempfile::tempdir().expect("temp dir");

    let results = [
        (
            "oracle equivalence of gap and prism checks",
            oracle_equivalence(&suite, detect_ms),
        ),
        ("staged precision on the noisy catalogue", staged_precision(&suite)),
        ("converging and skewed handles rejected", failure_modes()),
        ("edge level semantics", merge_levels()),
        ("line fit optimality", line_fit_optimality()),
        ("ranking scaling and monotonicity", ranking_properties()),
        ("runtime on a cluttered frame", performance()),
        ("eval report determinism", determinism(dir.path())),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
