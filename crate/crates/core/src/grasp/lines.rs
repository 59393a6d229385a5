use super::BoundaryLine;
use crate::edges::ValidatedBoundary;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::raster::Pixel;

/// Total-least-squares line through 2D points.
///
/// `p0` is the centroid and `u` the dominant direction of the scatter, signed
/// so that `u_y ≥ 0` (or `u_x > 0` when `u_y = 0`).
pub fn fit_line(points: &[Vec2]) -> Result<BoundaryLine> {
    if points.len() < 2 {
        return Err(Error::LineFit("fewer than two points"));
    }
    let n = points.len() as f64;
    let p0 = points.iter().sum::<Vec2>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = p - p0;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let (sxx, sxy, syy) = (sxx / n, sxy / n, syy / n);
    let trace = sxx + syy;
    if trace <= f64::EPSILON * p0.norm_squared().max(1.0) {
        return Err(Error::LineFit("all points coincide"));
    }
    let spread = ((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy).sqrt();
    if spread <= 1e-9 * trace {
        return Err(Error::LineFit("isotropic scatter"));
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut u = Vec2::new(theta.cos(), theta.sin());
    if u.y < 0.0 || (u.y == 0.0 && u.x < 0.0) {
        u = -u;
    }
    let ss: f64 = points
        .iter()
        .map(|p| {
            let d = p - p0;
            let perp = d.x * u.y - d.y * u.x;
            perp * perp
        })
        .sum();
    Ok(BoundaryLine {
        p0,
        u,
        inlier_count: points.len(),
        rms: (ss / n).sqrt(),
    })
}

/// One line per side of a validated boundary.
pub fn extract_boundary_lines(vb: &ValidatedBoundary) -> Result<(BoundaryLine, BoundaryLine)> {
    let to_xy = |ps: &[Pixel]| -> Vec<Vec2> {
        ps.iter()
            .map(|p| {
                let (x, y) = p.xy();
                Vec2::new(x, y)
            })
            .collect()
    };
    Ok((fit_line(&to_xy(&vb.plus))?, fit_line(&to_xy(&vb.minus))?))
}
