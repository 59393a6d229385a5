//! Small geometric helpers shared across the pipeline.

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Angle between two vectors in radians, in `[0, π]`.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // atan2 form stays accurate for nearly parallel vectors.
    a.cross(b).norm().atan2(a.dot(b))
}

/// Angle between two lines (unsigned directions), in `[0, π/2]`.
pub fn axis_angle(a: &Vec3, b: &Vec3) -> f64 {
    let t = angle_between(a, b);
    t.min(std::f64::consts::PI - t)
}

/// Eigen-decomposition of a symmetric 3×3 matrix with eigenvalues sorted
/// descending. Eigenvector signs are fixed so the largest-magnitude component
/// is positive.
pub fn sorted_eigen3(m: &Matrix3<f64>) -> ([f64; 3], [Vec3; 3]) {
    let eig = SymmetricEigen::new(*m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.map(|i| eig.eigenvalues[i]);
    let vecs = order.map(|i| canonical_sign(eig.eigenvectors.column(i).into_owned()));
    (vals, vecs)
}

pub(crate) fn canonical_sign(v: Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Running first and second moments of a 3D point set.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments3 {
    pub n: usize,
    sum: Vec3,
    outer: Matrix3<f64>,
    origin: Vec3,
}

impl Moments3 {
    /// Moments accumulated relative to `origin` to limit cancellation.
    pub fn with_origin(origin: Vec3) -> Self {
        Self {
            origin,
            ..Default::default()
        }
    }

    #[inline]
    pub fn push(&mut self, p: &Vec3) {
        let d = p - self.origin;
        self.n += 1;
        self.sum += d;
        self.outer += d * d.transpose();
    }

    pub fn mean(&self) -> Vec3 {
        self.origin + self.sum / self.n as f64
    }

    /// Population covariance.
    pub fn covariance(&self) -> Matrix3<f64> {
        let n = self.n as f64;
        let m = self.sum / n;
        self.outer / n - m * m.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn angles() {
        let x = Vec3::x();
        let y = Vec3::y();
        assert_relative_eq!(angle_between(&x, &y), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(axis_angle(&x, &-x), 0.0);
        assert_relative_eq!(angle_between(&x, &(x * 3.0)), 0.0);
    }

    #[test]
    fn eigen_sorted() {
        let m = Matrix3::from_diagonal(&Vec3::new(1.0, 5.0, 3.0));
        let (vals, vecs) = sorted_eigen3(&m);
        assert_eq!(vals, [5.0, 3.0, 1.0]);
        assert_relative_eq!(vecs[0], Vec3::y());
        assert_relative_eq!(vecs[2], Vec3::x());
    }
}
