//! Smooth-surface segmentation of organized clouds by region growing.
//!
//! Seeds are visited in order of increasing local curvature (ties by raster
//! index). From each seed the region grows over 4-connected neighbors whose
//! normal lies within the smoothness threshold of the pixel that reaches them,
//! and whose 3D distance to it stays below `max_step` so growth never crosses
//! a depth discontinuity.
//!
//! Normals blur across creases, so grown regions stop a few pixels short of
//! a fold. A completion pass then extends each segment over unclaimed pixels
//! that stay close to the tangent plane of the rim pixel they start from.

mod boundary;
mod features;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::raster::{Grid, Pixel, N4};

pub use boundary::segment_boundary;
pub use features::{features_from_points, segment_features, SegmentFeatures};

/// Rectangular region of interest in pixel coordinates (inclusive-exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub row0: usize,
    pub col0: usize,
    pub row1: usize,
    pub col1: usize,
}

impl Roi {
    pub fn contains(&self, p: Pixel) -> bool {
        p.row >= self.row0 && p.row < self.row1 && p.col >= self.col0 && p.col < self.col1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    /// Smoothness threshold τ (radians).
    pub smoothness: f64,
    pub min_size: usize,
    /// Largest 3D step (m) between adjacent pixels of one segment.
    pub max_step: f64,
    /// Depth (px) of the rim completion pass; 0 disables it.
    pub rim_extension: usize,
    /// Largest distance (m) of a completed pixel from its rim tangent plane.
    pub rim_tolerance: f64,
    pub roi: Option<Roi>,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            smoothness: 4f64.to_radians(),
            min_size: 300,
            max_step: 0.01,
            rim_extension: 6,
            rim_tolerance: 0.005,
            roi: None,
        }
    }
}

/// A connected smooth-surface patch.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: usize,
    /// Member pixels in admission order; the first is the seed.
    pub pixels: Vec<Pixel>,
    /// `seed_of[i]` is the pixel whose expansion admitted `pixels[i]`
    /// (the seed admits itself).
    pub seed_of: Vec<Pixel>,
    /// Pixels added by rim completion.
    pub extension: Vec<Pixel>,
    /// Rim pixels of all members, ordered by contour tracing.
    pub boundary: Vec<Pixel>,
}

impl Segment {
    /// Grown pixels followed by completed ones.
    pub fn members(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.pixels.iter().chain(&self.extension).copied()
    }

    pub fn len(&self) -> usize {
        self.pixels.len() + self.extension.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
    /// Segment id per pixel.
    pub labels: Grid<Option<u32>>,
}

const UNSEEN: u32 = u32::MAX;
const DISCARDED: u32 = u32::MAX - 1;
const GROWING: u32 = u32::MAX - 2;

/// Region growing over the frame's normal-valid pixels.
pub fn region_grow(frame: &Frame, params: &RegionParams) -> Result<Segmentation> {
    let nf = frame
        .normals
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("region growing needs normals".into()))?;
    if !(params.smoothness > 0.0 && params.smoothness < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "smoothness threshold {} outside (0, pi/2)",
            params.smoothness
        )));
    }
    let cos_tau = params.smoothness.cos();
    let eligible = |p: Pixel| nf.valid[p] && params.roi.is_none_or(|r| r.contains(p));

    let mut seeds: Vec<usize> = (0..frame.points.len())
        .filter(|&i| eligible(frame.points.pixel_of(i)))
        .collect();
    seeds.sort_by(|&a, &b| nf.curvature[a].total_cmp(&nf.curvature[b]).then(a.cmp(&b)));

    let mut state = Grid::filled(frame.width(), frame.height(), UNSEEN);
    let mut segments = Vec::new();
    let mut pixels = Vec::new();
    let mut seed_of = Vec::new();

    for seed in seeds {
        if state[seed] != UNSEEN {
            continue;
        }
        let seed_px = frame.points.pixel_of(seed);
        pixels.clear();
        seed_of.clear();
        pixels.push(seed_px);
        seed_of.push(seed_px);
        state[seed] = GROWING;
        let mut head = 0;
        while head < pixels.len() {
            let p = pixels[head];
            head += 1;
            let np = nf.normals[p];
            let pp = frame.points[p];
            for (dr, dc) in N4 {
                let Some(q) = state.offset(p, dr, dc) else {
                    continue;
                };
                if state[q] != UNSEEN || !eligible(q) {
                    continue;
                }
                if np.dot(&nf.normals[q]) < cos_tau {
                    continue;
                }
                if (frame.points[q] - pp).norm() > params.max_step {
                    continue;
                }
                state[q] = GROWING;
                pixels.push(q);
                seed_of.push(p);
            }
        }
        let mark = if pixels.len() >= params.min_size {
            segments.len() as u32
        } else {
            DISCARDED
        };
        for &p in &pixels {
            state[p] = mark;
        }
        if mark != DISCARDED {
            let mut seg = Segment {
                id: segments.len(),
                pixels: pixels.clone(),
                seed_of: seed_of.clone(),
                extension: Vec::new(),
                boundary: Vec::new(),
            };
            seg.boundary = segment_boundary(&seg);
            segments.push(seg);
        }
    }

    if params.rim_extension > 0 {
        for seg in &mut segments {
            complete_rim(frame, params, &mut state, seg);
            seg.boundary = segment_boundary(seg);
        }
    }
    let labels = state.map(|&s| (s < GROWING && s != DISCARDED).then_some(s));
    Ok(Segmentation { segments, labels })
}

/// Breadth-first completion from the rim of `seg` over valid pixels no
/// segment owns. A pixel joins if it lies within `rim_tolerance` of the
/// tangent plane at the rim pixel its chain started from, within `max_step`
/// of the pixel reaching it, and at most `rim_extension` steps out.
fn complete_rim(frame: &Frame, params: &RegionParams, state: &mut Grid<u32>, seg: &mut Segment) {
    let nf = frame.normals.as_ref().expect("checked by caller");
    let id = seg.id as u32;
    let free = |s: u32| s == UNSEEN || s == DISCARDED;
    let mut queue: std::collections::VecDeque<(Pixel, Pixel, usize)> =
        seg.boundary.iter().map(|&p| (p, p, 0)).collect();
    while let Some((p, origin, depth)) = queue.pop_front() {
        if depth == params.rim_extension {
            continue;
        }
        let (o, n) = (frame.points[origin], nf.normals[origin]);
        for (dr, dc) in N4 {
            let Some(q) = state.offset(p, dr, dc) else {
                continue;
            };
            if !free(state[q]) || !frame.valid[q] || params.roi.is_some_and(|r| !r.contains(q)) {
                continue;
            }
            let pq = frame.points[q];
            if (pq - o).dot(&n).abs() > params.rim_tolerance || (pq - frame.points[p]).norm() > params.max_step {
                continue;
            }
            state[q] = id;
            seg.extension.push(q);
            queue.push_back((q, origin, depth + 1));
        }
    }
}
