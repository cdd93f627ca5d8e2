//! Principal components via cyclic Jacobi on the sample covariance.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const JACOBI_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Descending; exact ties keep the original diagonal order.
    pub values: Vec<f64>,
    /// Row `k` is the unit eigenvector for `values[k]`, signed so its
    /// largest-magnitude entry is positive.
    pub vectors: Matrix,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-12` times the full norm.
pub fn jacobi_eigen(sym: &Matrix) -> Result<SymmetricEigen> {
    let d = sym.rows();
    if sym.cols() != d {
        return Err(Error::SizeMismatch {
            expected: d,
            found: sym.cols(),
        });
    }
    let mut a = sym.clone();
    let mut v = Matrix::zeros(d, d);
    for i in 0..d {
        v.set(i, i, 1.0);
    }
    let total = libm::sqrt(a.as_slice().iter().map(|x| x * x).sum::<f64>());
    let off_norm = |a: &Matrix| {
        let mut s = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                s += 2.0 * a.get(p, q) * a.get(p, q);
            }
        }
        libm::sqrt(s)
    };

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_TOLERANCE * total {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t =
                    libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    // stable: equal eigenvalues keep coordinate order
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(d, d);
    for (k, &col) in order.iter().enumerate() {
        let mut pivot = 0.0f64;
        for r in 0..d {
            let x = v.get(r, col);
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d {
            vectors.set(k, r, sign * v.get(r, col));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// A fitted PCA model.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub eigen: SymmetricEigen,
}

impl Pca {
    /// Centers the data and decomposes its sample covariance (divisor `n − 1`,
    /// or `1` for a single point).
    pub fn fit(points: &Matrix) -> Result<Self> {
        let (n, d) = (points.rows(), points.cols());
        if n == 0 || d == 0 {
            return Err(Error::param(
                "points",
                "need at least one point and one dimension",
            ));
        }
        let mut mean = vec![0.0; d];
        for row in points.iter_rows() {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = Matrix::zeros(d, d);
        let mut centered = vec![0.0; d];
        for row in points.iter_rows() {
            for ((c, &x), &m) in centered.iter_mut().zip(row).zip(&mean) {
                *c = x - m;
            }
            for a in 0..d {
                for b in a..d {
                    let v = cov.get(a, b) + centered[a] * centered[b];
                    cov.set(a, b, v);
                }
            }
        }
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
        for a in 0..d {
            for b in a..d {
                let v = cov.get(a, b) / denom;
                cov.set(a, b, v);
                cov.set(b, a, v);
            }
        }
        let eigen = jacobi_eigen(&cov)?;
        Ok(Self {
            mean,
            covariance: cov,
            eigen,
        })
    }

    /// Coordinates of `points` on the top `k` components.
    pub fn project(&self, points: &Matrix, k: usize) -> Result<Matrix> {
        let d = self.mean.len();
        if points.cols() != d {
            return Err(Error::SizeMismatch {
                expected: d,
                found: points.cols(),
            });
        }
        if k > d {
            return Err(Error::param("k", "exceeds the input dimension"));
        }
        let mut out = Matrix::zeros(points.rows(), k);
        for (i, row) in points.iter_rows().enumerate() {
            for c in 0..k {
                let axis = self.eigen.vectors.row(c);
                let dot: f64 = row
                    .iter()
                    .zip(&self.mean)
                    .zip(axis)
                    .map(|((x, m), a)| (x - m) * a)
                    .sum();
                out.set(i, c, dot);
            }
        }
        Ok(out)
    }

    /// Share of total variance on the top `k` components.
    pub fn captured_variance_fraction(&self, k: usize) -> f64 {
        let total: f64 = self.eigen.values.iter().map(|v| v.max(0.0)).sum();
        if total == 0.0 {
            return 0.0;
        }
        self.eigen
            .values
            .iter()
            .take(k)
            .map(|v| v.max(0.0))
            .sum::<f64>()
            / total
    }
}

/// Projects `points` onto their top `k` principal components.
pub fn pca_project(points: &Matrix, k: usize) -> Result<Matrix> {
    Pca::fit(points)?.project(points, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix_is_already_decomposed() {
        let m = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&m).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors.row(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn ties_keep_coordinate_order() {
        let m = Matrix::from_rows(&[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&m).unwrap();
        assert_eq!(e.vectors.row(0), &[1.0, 0.0]);
        assert_eq!(e.vectors.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn eigenvectors_reconstruct_the_matrix() {
        let m = Matrix::from_rows(&[[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]]).unwrap();
        let e = jacobi_eigen(&m).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let r: f64 = (0..3)
                    .map(|k| e.values[k] * e.vectors.get(k, a) * e.vectors.get(k, b))
                    .sum();
                assert_abs_diff_eq!(r, m.get(a, b), epsilon = 1e-12);
            }
        }
        for k in 0..3 {
            let row = e.vectors.row(k);
            let max = row
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            assert!(max > 0.0);
        }
    }

    #[test]
    fn projection_rejects_too_many_components() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(pca_project(&m, 3).is_err());
    }
}
