use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use edgegrasp::config::load_gripper;
use edgegrasp::eval::{evaluate_detection, EvalReport, MatchCriteria, SceneReport};
use edgegrasp::frame::{estimate_normals, load_frame, load_intrinsics, load_pcd, smooth_cloud};
use edgegrasp::output::HandlesFile;
use edgegrasp::segmentation::region_grow;
use edgegrasp::synth::{render, save_scene, suite_specs, GroundTruth};
use edgegrasp::{detect_handles, viz, DetectConfig, Frame};

use crate::{DetectArgs, EvalArgs, SynthArgs, VizArgs};

fn load_config(path: Option<&Path>) -> Result<DetectConfig> {
    match path {
        Some(p) => Ok(DetectConfig::load(p)?),
        None => Ok(DetectConfig::default()),
    }
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let gripper = match &args.gripper {
        Some(p) => load_gripper(p)?,
        None => config.gripper,
    };
    let (frame, frame_id) = match (&args.pcd, &args.color, &args.depth, &args.intrinsics) {
        (Some(pcd), ..) => (load_pcd(pcd)?, stem(pcd)),
        (None, Some(color), Some(depth), Some(k)) => {
            let frame = load_frame(color, depth, load_intrinsics(k)?)?;
            // Frames written by `synth` share a directory named after the scene.
            let id = color
                .parent()
                .and_then(|d| d.file_name())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| stem(color));
            (frame, id)
        }
        _ => bail!("need --pcd or all of --color, --depth and --intrinsics"),
    };
    let det = detect_handles(&frame, &gripper, &config)?;
    let handles = HandlesFile::from_detection(&frame_id, &det);
    handles.save(&args.out)?;
    if let Some(path) = &args.overlay {
        viz::overlay(&det.frame, Some(&det.segmentation), &handles).save(path)?;
    }
    println!(
        "{frame_id}: {} handles written ({} hypotheses, {} unique survivors, {:.0} ms)",
        handles.handles.len(),
        det.counts.hypotheses,
        det.ranked.len(),
        det.timings.total
    );
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    if let Some(s) = args.sigma {
        if !(s >= 0.0 && s.is_finite()) {
            bail!("--sigma must be a non-negative number");
        }
    }
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    for mut spec in suite_specs() {
        if let Some(s) = args.sigma {
            spec = spec.with_noise(s);
        }
        let r = render(&spec)?;
        save_scene(&args.out_dir.join(&spec.name), &spec, &r)?;
        println!("{}: {} ground-truth handles", spec.name, r.truth.handles.len());
    }
    Ok(())
}

/// Subdirectories of `dir` holding a rendered scene, sorted by name.
fn scene_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    let mut out = Vec::new();
    for e in entries {
        let p = e?.path();
        if p.is_dir() && p.join("truth.json").is_file() {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Report and detection time (ms) of one scene.
type SceneResult = Result<(SceneReport, f64)>;

fn eval_scene(dir: &Path, config: &DetectConfig, crit: &MatchCriteria) -> SceneResult {
    let frame = Frame::load_dir(dir)?;
    let truth = GroundTruth::load(dir)?;
    let t = Instant::now();
    let det = detect_handles(&frame, &config.gripper, config)?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    Ok((evaluate_detection(&det, &truth, crit), ms))
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let crit = match &args.criteria {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            MatchCriteria::from_toml(&text).with_context(|| p.display().to_string())?
        }
        None => MatchCriteria::default(),
    };
    let dirs = scene_dirs(&args.scenes_dir)?;
    if dirs.is_empty() {
        bail!(
            "no scene directories (with truth.json) under {}",
            args.scenes_dir.display()
        );
    }
    let jobs = match args.jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(dirs.len());

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SceneResult>>> = Mutex::new((0..dirs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= dirs.len() {
                    break;
                }
                let r = eval_scene(&dirs[i], &config, &crit).with_context(|| dirs[i].display().to_string());
                results.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });

    let mut scenes = Vec::new();
    for r in results.into_inner().expect("workers joined") {
        let (rep, ms) = r.expect("every scene visited")?;
        let p = &rep.precision;
        println!(
            "{:24} first {:3}/{:<3} parallel {:3}/{:<3} overall {:3}/{:<3} {:6.0} ms",
            rep.scene,
            p.first_stage.matched,
            p.first_stage.total,
            p.after_parallel.matched,
            p.after_parallel.total,
            p.overall.matched,
            p.overall.total,
            ms
        );
        scenes.push(rep);
    }
    let report = EvalReport::aggregate(crit, scenes);
    std::fs::write(&args.report, report.to_json()).with_context(|| format!("writing {}", args.report.display()))?;
    let p = &report.precision;
    println!(
        "precision: first {:.3}, parallel {:.3}, overall {:.3}, top-k {:.3}; monotone: {}",
        p.first_stage.precision, p.after_parallel.precision, p.overall.precision, p.top_k.precision, report.monotone
    );
    Ok(())
}

pub fn viz(args: &VizArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let frame = if args.frame.is_dir() {
        Frame::load_dir(&args.frame)?
    } else {
        load_pcd(&args.frame)?
    };
    let handles = HandlesFile::load(&args.handles)?;
    let mut work = if config.smoothing.enabled {
        smooth_cloud(&frame, config.smoothing.spatial_sigma, config.smoothing.range_sigma)?
    } else {
        frame
    };
    work = estimate_normals(&work, config.normals)?;
    let seg = region_grow(&work, &config.region_params())?;
    viz::overlay(&work, Some(&seg), &handles).save(&args.out)?;
    Ok(())
}
