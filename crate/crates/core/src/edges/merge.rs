use super::EdgeMap;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::raster::{Grid, Pixel};

/// Line through the handle center, given in image coordinates. Boundary
/// points are split by the sign of their offset from `center` along `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitAxis {
    pub center: Vec2,
    /// Unit image-space direction of the closing axis.
    pub dir: Vec2,
}

impl SplitAxis {
    pub fn offset(&self, p: Pixel) -> f64 {
        let (x, y) = p.xy();
        (Vec2::new(x, y) - self.center).dot(&self.dir)
    }
}

/// Boundary points retained by the level test, split by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedBoundary {
    pub plus: Vec<Pixel>,
    pub minus: Vec<Pixel>,
    /// Level of each input rim pixel, in input order.
    pub levels: Vec<u8>,
    /// Retained pixels within 1 px of the split line.
    pub ambiguous: usize,
}

/// Points within this distance of the split line belong to neither side.
const SPLIT_DEADBAND: f64 = 1.0;

/// Union of intensity and depth edges dilated by a Chebyshev radius, so the
/// level of a rim pixel is a single lookup.
#[derive(Debug, Clone)]
pub struct EdgeSupport {
    near: Grid<bool>,
}

impl EdgeSupport {
    pub fn new(ec: &EdgeMap, ed: &EdgeMap, radius: usize) -> Result<Self> {
        if !ec.mask.same_shape(&ed.mask) {
            return Err(Error::DimensionMismatch(format!(
                "edge maps {}x{} and {}x{}",
                ec.width(),
                ec.height(),
                ed.width(),
                ed.height()
            )));
        }
        let (w, h) = (ec.width(), ec.height());
        let union = Grid::from_fn(w, h, |p| ec.mask[p] || ed.mask[p]);
        let rows = dilate_1d(&union, radius, true);
        Ok(Self {
            near: dilate_1d(&rows, radius, false),
        })
    }

    pub fn level(&self, p: Pixel) -> u8 {
        self.near[p] as u8
    }

    /// Levels and side split of the rim pixels `es`.
    pub fn merge(&self, es: &[Pixel], split: SplitAxis) -> Result<ValidatedBoundary> {
        if !(split.dir.norm() > 0.0) {
            return Err(Error::InvalidParameter("split axis has zero direction".into()));
        }
        let split = SplitAxis {
            dir: split.dir.normalize(),
            ..split
        };
        let mut vb = ValidatedBoundary {
            plus: Vec::new(),
            minus: Vec::new(),
            levels: Vec::with_capacity(es.len()),
            ambiguous: 0,
        };
        for &p in es {
            let level = self.level(p);
            vb.levels.push(level);
            if level == 0 {
                continue;
            }
            let s = split.offset(p);
            if s.abs() <= SPLIT_DEADBAND {
                vb.ambiguous += 1;
            } else if s > 0.0 {
                vb.plus.push(p);
            } else {
                vb.minus.push(p);
            }
        }
        if vb.plus.len() < 2 || vb.minus.len() < 2 {
            return Err(Error::BoundaryNotFound {
                plus: vb.plus.len(),
                minus: vb.minus.len(),
            });
        }
        Ok(vb)
    }
}

/// Validated boundary set: rim pixels with an intensity or depth edge within
/// Chebyshev distance `match_radius`, split into the two sides of the handle.
pub fn merge_boundary(
    es: &[Pixel],
    ec: &EdgeMap,
    ed: &EdgeMap,
    match_radius: usize,
    split: SplitAxis,
) -> Result<ValidatedBoundary> {
    EdgeSupport::new(ec, ed, match_radius)?.merge(es, split)
}

/// Running-count dilation along rows (`horizontal`) or columns.
fn dilate_1d(src: &Grid<bool>, radius: usize, horizontal: bool) -> Grid<bool> {
    let (w, h) = (src.width(), src.height());
    let (lines, len) = if horizontal { (h, w) } else { (w, h) };
    let at = |line: usize, i: usize| {
        if horizontal {
            Pixel::new(line, i)
        } else {
            Pixel::new(i, line)
        }
    };
    let mut out = Grid::filled(w, h, false);
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for i in 0..len {
            prefix[i + 1] = prefix[i] + src[at(line, i)] as usize;
        }
        for i in 0..len {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(len);
            out[at(line, i)] = prefix[hi] > prefix[lo];
        }
    }
    out
}
