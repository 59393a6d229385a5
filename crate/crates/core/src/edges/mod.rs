//! Intensity edges, depth edges, and their fusion with segment rims.

mod canny;
mod depth;
mod merge;

use serde::{Deserialize, Serialize};

use crate::raster::{Grid, Pixel};

pub use canny::{canny, gradient_magnitude, CannyParams};
pub use depth::{depth_edges, DepthEdgeParams};
pub use merge::{merge_boundary, EdgeSupport, SplitAxis, ValidatedBoundary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Intensity,
    Depth,
}

/// Binary edge raster.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub kind: EdgeKind,
    pub mask: Grid<bool>,
}

impl EdgeMap {
    pub fn empty(kind: EdgeKind, width: usize, height: usize) -> Self {
        Self {
            kind,
            mask: Grid::filled(width, height, false),
        }
    }

    pub fn from_pixels(kind: EdgeKind, width: usize, height: usize, pixels: &[Pixel]) -> Self {
        let mut m = Self::empty(kind, width, height);
        for &p in pixels {
            m.mask[p] = true;
        }
        m
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn contains(&self, p: Pixel) -> bool {
        self.mask[p]
    }

    pub fn len(&self) -> usize {
        self.mask.as_slice().iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.as_slice().iter().any(|&b| b)
    }

    pub fn pixels(&self) -> Vec<Pixel> {
        self.mask.pixels().filter(|&p| self.mask[p]).collect()
    }
}
