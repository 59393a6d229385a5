//! Row-major image rasters and pixel coordinates.

use serde::{Deserialize, Serialize};

/// Integer pixel coordinate. `col` is x, `row` is y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Image-plane position of the pixel center as `(x, y)`.
    pub fn xy(self) -> (f64, f64) {
        (self.col as f64, self.row as f64)
    }

    pub fn chebyshev(self, other: Pixel) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

pub(crate) const N4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
pub(crate) const N8: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Dense H×W raster stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    /// Wraps a row-major buffer. Panics if the length does not match.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "raster buffer size mismatch");
        Self { width, height, data }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(Pixel) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(Pixel::new(row, col)));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index_of(&self, p: Pixel) -> usize {
        p.row * self.width + p.col
    }

    #[inline]
    pub fn pixel_of(&self, idx: usize) -> Pixel {
        Pixel::new(idx / self.width, idx % self.width)
    }

    #[inline]
    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    /// Neighbor of `p` at `(dr, dc)`, if it lies in the raster.
    #[inline]
    pub fn offset(&self, p: Pixel, dr: isize, dc: isize) -> Option<Pixel> {
        let r = p.row as isize + dr;
        let c = p.col as isize + dc;
        self.contains(r, c).then(|| Pixel::new(r as usize, c as usize))
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        (0..self.data.len()).map(move |i| self.pixel_of(i))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> Default for Grid<T> {
    /// Empty 0×0 raster.
    fn default() -> Self {
        Self {
            width: 0,
            height: 0,
            data: Vec::new(),
        }
    }
}

impl<T> std::ops::Index<Pixel> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, p: Pixel) -> &T {
        &self.data[p.row * self.width + p.col]
    }
}

impl<T> std::ops::IndexMut<Pixel> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, p: Pixel) -> &mut T {
        &mut self.data[p.row * self.width + p.col]
    }
}

impl<T> std::ops::Index<usize> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> std::ops::IndexMut<usize> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let g = Grid::from_fn(7, 5, |p| p.row * 100 + p.col);
        for i in 0..g.len() {
            let p = g.pixel_of(i);
            assert_eq!(g.index_of(p), i);
            assert_eq!(g[p], p.row * 100 + p.col);
        }
        assert!(g.offset(Pixel::new(0, 0), -1, 0).is_none());
        assert_eq!(g.offset(Pixel::new(4, 6), 0, -1), Some(Pixel::new(4, 5)));
    }
}
