use serde::{Deserialize, Serialize};

use super::{EdgeKind, EdgeMap};
use crate::error::{Error, Result};
use crate::raster::{Grid, Pixel, N8};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CannyParams {
    pub sigma: f64,
    /// Hysteresis thresholds on the Sobel magnitude scaled to 0–255.
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low: 20.0,
            high: 60.0,
        }
    }
}

/// Canny edge detector on a luminance raster (0–255).
pub fn canny(gray: &Grid<f64>, params: CannyParams) -> Result<EdgeMap> {
    if !(params.sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "canny sigma {} must be positive",
            params.sigma
        )));
    }
    if !(params.low > 0.0 && params.low < params.high) {
        return Err(Error::InvalidParameter(format!(
            "canny thresholds need 0 < low < high (low={}, high={})",
            params.low, params.high
        )));
    }
    let (mag, bins) = gradients(&blur(gray, params.sigma), params.sigma);
    let thin = suppress(&mag, &bins);

    let mut mask = Grid::filled(gray.width(), gray.height(), false);
    let mut stack: Vec<Pixel> = Vec::new();
    for i in 0..mag.len() {
        if thin[i] && mag[i] >= params.high {
            mask[i] = true;
            stack.push(mag.pixel_of(i));
        }
    }
    while let Some(p) = stack.pop() {
        for (dr, dc) in N8 {
            if let Some(q) = mask.offset(p, dr, dc) {
                if !mask[q] && thin[q] && mag[q] >= params.low {
                    mask[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    Ok(EdgeMap {
        kind: EdgeKind::Intensity,
        mask,
    })
}

/// Blurred Sobel magnitude, scaled so that an ideal step of height h between
/// two pixel columns reads h after blurring.
pub fn gradient_magnitude(gray: &Grid<f64>, sigma: f64) -> Grid<f64> {
    gradients(&blur(gray, sigma), sigma).0
}

fn gaussian_kernel(sigma: f64) -> (Vec<f64>, isize) {
    let rad = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-rad..=rad)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    (kernel, rad)
}

fn blur(src: &Grid<f64>, sigma: f64) -> Grid<f64> {
    let (kernel, rad) = gaussian_kernel(sigma);

    let (w, h) = (src.width() as isize, src.height() as isize);
    let clamp = |v: isize, n: isize| v.clamp(0, n - 1) as usize;
    let horiz = Grid::from_fn(src.width(), src.height(), |p| {
        let mut acc = 0.0;
        for (k, i) in kernel.iter().zip(-rad..=rad) {
            acc += k * src[Pixel::new(p.row, clamp(p.col as isize + i, w))];
        }
        acc
    });
    Grid::from_fn(src.width(), src.height(), |p| {
        let mut acc = 0.0;
        for (k, i) in kernel.iter().zip(-rad..=rad) {
            acc += k * horiz[Pixel::new(clamp(p.row as isize + i, h), p.col)];
        }
        acc
    })
}

/// Neighbor offsets along the gradient for each of the four direction bins.
const BIN_STEP: [(isize, isize); 4] = [(0, 1), (1, 1), (1, 0), (1, -1)];

fn gradients(img: &Grid<f64>, sigma: f64) -> (Grid<f64>, Grid<u8>) {
    // A blurred step rises by the two central kernel taps across the Sobel
    // stencil; the stencil's row weights sum to 4.
    let (kernel, rad) = gaussian_kernel(sigma);
    let gain = 4.0 * (kernel[rad as usize] + kernel[rad as usize + 1]);
    let (w, h) = (img.width() as isize, img.height() as isize);
    let at = |r: isize, c: isize| img[Pixel::new(r.clamp(0, h - 1) as usize, c.clamp(0, w - 1) as usize)];
    let mut mag = Grid::filled(img.width(), img.height(), 0.0);
    let mut bins = Grid::filled(img.width(), img.height(), 0u8);
    for p in img.pixels() {
        let (r, c) = (p.row as isize, p.col as isize);
        let gx = at(r - 1, c + 1) + 2.0 * at(r, c + 1) + at(r + 1, c + 1)
            - at(r - 1, c - 1)
            - 2.0 * at(r, c - 1)
            - at(r + 1, c - 1);
        let gy = at(r + 1, c - 1) + 2.0 * at(r + 1, c) + at(r + 1, c + 1)
            - at(r - 1, c - 1)
            - 2.0 * at(r - 1, c)
            - at(r - 1, c + 1);
        mag[p] = gx.hypot(gy) / gain;
        let deg = gy.atan2(gx).to_degrees().rem_euclid(180.0);
        bins[p] = (((deg + 22.5) / 45.0) as u8) % 4;
    }
    (mag, bins)
}

/// Non-maximum suppression. The comparison is strict against the backward
/// neighbor and non-strict against the forward one, so a plateau of two equal
/// maxima keeps exactly one pixel. Equality is judged up to rounding noise so
/// the kept side does not depend on summation order.
fn suppress(mag: &Grid<f64>, bins: &Grid<u8>) -> Grid<bool> {
    Grid::from_fn(mag.width(), mag.height(), |p| {
        let m = mag[p];
        if m <= 0.0 {
            return false;
        }
        let (dr, dc) = BIN_STEP[bins[p] as usize];
        let fwd = mag.offset(p, dr, dc).map_or(0.0, |q| mag[q]);
        let back = mag.offset(p, -dr, -dc).map_or(0.0, |q| mag[q]);
        let eps = 1e-9 * m.max(1.0);
        m > back + eps && m >= fwd - eps
    })
}
