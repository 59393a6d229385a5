//! Overlay rendering: segment boundaries, boundary evidence, fitted lines and
//! the rank-1 handle frame drawn over a dimmed copy of the color image.

use std::path::Path;

use crate::error::Result;
use crate::frame::{save_color_png, Frame, Rgb};
use crate::geometry::{Vec2, Vec3};
use crate::output::{HandleOut, HandlesFile};
use crate::raster::Grid;
use crate::segmentation::Segmentation;

const BOUNDARY: Rgb = [255, 255, 255];
const PLUS: Rgb = [0, 230, 0];
const MINUS: Rgb = [0, 160, 255];
const LINE: Rgb = [255, 230, 0];
const OTHER: Rgb = [255, 140, 0];
const AXIS_A: Rgb = [255, 0, 0];
const AXIS_F: Rgb = [0, 255, 0];
const AXIS_N: Rgb = [60, 60, 255];

/// Length of the drawn frame axes (m).
const AXIS_LEN: f64 = 0.04;

pub struct Canvas {
    pub image: Grid<Rgb>,
}

impl Canvas {
    /// Starts from the frame's color image at half brightness.
    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            image: frame.color.map(|c| c.map(|v| v / 2 + 32)),
        }
    }

    pub fn dot(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.image.width() && (y as usize) < self.image.height() {
            let i = y as usize * self.image.width() + x as usize;
            self.image.as_mut_slice()[i] = c;
        }
    }

    pub fn segment(&mut self, p: Vec2, q: Vec2, c: Rgb) {
        let (x0, y0) = (p.x.round() as i64, p.y.round() as i64);
        let (x1, y1) = (q.x.round() as i64, q.y.round() as i64);
        // Bresenham.
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        let limit = 4 * (self.image.width() + self.image.height()) as i64;
        for _ in 0..limit {
            self.dot(x, y, c);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_color_png(&self.image, path)
    }
}

fn project(frame: &Frame, p: &Vec3) -> Option<Vec2> {
    frame.intrinsics.project(p).map(|(x, y)| Vec2::new(x, y))
}

fn draw_lines(canvas: &mut Canvas, h: &HandleOut) {
    for (line, pts) in h.lines.iter().zip([&h.evidence.plus, &h.evidence.minus]) {
        // Span the evidence when there is any, else a fixed length.
        let ts = pts
            .iter()
            .map(|&[x, y]| (Vec2::new(x as f64, y as f64) - line.p0).dot(&line.u));
        let (lo, hi) = ts.fold((f64::MAX, f64::MIN), |(lo, hi), t| (lo.min(t), hi.max(t)));
        let (lo, hi) = if lo <= hi { (lo - 3.0, hi + 3.0) } else { (-20.0, 20.0) };
        canvas.segment(line.p0 + line.u * lo, line.p0 + line.u * hi, LINE);
    }
}

fn draw_frame(canvas: &mut Canvas, frame: &Frame, h: &HandleOut, top: bool) {
    let Some(c) = project(frame, &h.center) else {
        return;
    };
    if !top {
        if let Some(e) = project(frame, &(h.center + h.a * h.r)) {
            canvas.segment(c * 2.0 - e, e, OTHER);
        }
        return;
    }
    for (dir, color) in [(h.f, AXIS_F), (h.n, AXIS_N), (h.a, AXIS_A)] {
        if let Some(e) = project(frame, &(h.center + dir * AXIS_LEN)) {
            canvas.segment(c, e, color);
        }
    }
}

/// Draws the overlay. Segment boundaries are drawn when `seg` is given.
pub fn overlay(frame: &Frame, seg: Option<&Segmentation>, handles: &HandlesFile) -> Canvas {
    let mut canvas = Canvas::from_frame(frame);
    for s in seg.map(|s| s.segments.as_slice()).unwrap_or_default() {
        for p in &s.boundary {
            canvas.dot(p.col as i64, p.row as i64, BOUNDARY);
        }
    }
    for h in &handles.handles {
        for (pts, color) in [(&h.evidence.plus, PLUS), (&h.evidence.minus, MINUS)] {
            for &[x, y] in pts {
                canvas.dot(x as i64, y as i64, color);
            }
        }
    }
    for h in &handles.handles {
        draw_lines(&mut canvas, h);
    }
    // Rank 1 last so it stays on top.
    let mut order: Vec<&HandleOut> = handles.handles.iter().collect();
    order.sort_by_key(|h| std::cmp::Reverse(h.rank));
    for h in order {
        draw_frame(&mut canvas, frame, h, h.rank == 1);
    }
    canvas
}
