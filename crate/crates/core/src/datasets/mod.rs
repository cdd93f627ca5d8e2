//! Seeded point-cloud generators.
//!
//! Point `i` of every random generator draws from its own stream (see
//! [`crate::rng`]), so outputs are bitwise reproducible for a given
//! `(parameters, seed)`.

pub mod pca;

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Purpose};

/// Where a point cloud came from.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorInfo {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub seed: Option<u64>,
}

impl GeneratorInfo {
    fn new(name: &str, params: &[(&str, f64)], seed: Option<u64>) -> Self {
        Self {
            name: name.into(),
            params: params.iter().map(|(k, v)| (String::from(*k), *v)).collect(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Matrix,
    pub labels: Option<Vec<i64>>,
    pub metadata: GeneratorInfo,
}

impl PointCloud {
    pub fn new(points: Matrix, labels: Option<Vec<i64>>, metadata: GeneratorInfo) -> Result<Self> {
        if points.rows() == 0 || points.cols() == 0 {
            return Err(Error::param("points", "need n ≥ 1 and d ≥ 1"));
        }
        if !points.is_finite() {
            return Err(Error::param("points", "coordinates must be finite"));
        }
        if let Some(l) = &labels {
            if l.len() != points.rows() {
                return Err(Error::SizeMismatch {
                    expected: points.rows(),
                    found: l.len(),
                });
            }
        }
        Ok(Self {
            points,
            labels,
            metadata,
        })
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

fn require(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::param(name, reason))
    }
}

/// `Z / ‖Z‖` for `Z` standard normal; redraws on the (measure-zero) zero vector.
fn unit_vector<R: rand_core::RngCore>(r: &mut R, out: &mut [f64]) {
    loop {
        rng::fill_standard_normal(r, out);
        let norm = libm::sqrt(out.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            for v in out.iter_mut() {
                *v /= norm;
            }
            return;
        }
    }
}

/// `n` i.i.d. uniform points on the unit sphere `S^{d−1}`.
pub fn sample_sphere(n: usize, d: usize, seed: u64) -> Result<PointCloud> {
    require(n >= 1, "n", "must be at least 1")?;
    require(d >= 2, "d", "must be at least 2")?;
    let mut points = Matrix::zeros(n, d);
    for i in 0..n {
        let mut r = rng::stream(seed, Purpose::Dataset, i as u64);
        unit_vector(&mut r, points.row_mut(i));
    }
    let meta = GeneratorInfo::new("sphere", &[("n", n as f64), ("d", d as f64)], Some(seed));
    PointCloud::new(points, None, meta)
}

pub const DEFAULT_SPLIT_EXPONENT: f64 = 0.1;

/// Sphere samples conditioned on `|x⁽¹⁾| ≥ d^{−threshold_exponent}`, labelled
/// `1` when the first coordinate is positive and `0` otherwise.
///
/// Candidate `k` uses stream `k`; accepted candidates keep their draw order.
pub fn sample_split_sphere(
    n: usize,
    d: usize,
    seed: u64,
    threshold_exponent: f64,
) -> Result<PointCloud> {
    require(n >= 1, "n", "must be at least 1")?;
    require(d >= 2, "d", "must be at least 2")?;
    require(
        threshold_exponent.is_finite(),
        "threshold_exponent",
        "must be finite",
    )?;
    let threshold = split_threshold(d, threshold_exponent);
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut candidate = vec![0.0; d];
    let mut attempts = 0usize;
    while labels.len() < n {
        if attempts >= 1_000_000 && (labels.len() as f64) < attempts as f64 * 1e-6 {
            return Err(Error::AcceptanceTooLow {
                accepted: labels.len(),
                attempts,
            });
        }
        let mut r = rng::stream(seed, Purpose::Dataset, attempts as u64);
        attempts += 1;
        unit_vector(&mut r, &mut candidate);
        if candidate[0].abs() >= threshold {
            labels.push(i64::from(candidate[0] > 0.0));
            data.extend_from_slice(&candidate);
        }
    }
    let meta = GeneratorInfo::new(
        "split-sphere",
        &[
            ("n", n as f64),
            ("d", d as f64),
            ("threshold_exponent", threshold_exponent),
            ("attempts", attempts as f64),
        ],
        Some(seed),
    );
    PointCloud::new(Matrix::from_vec(n, d, data)?, Some(labels), meta)
}

/// `d^{−exponent}`.
pub fn split_threshold(d: usize, exponent: f64) -> f64 {
    libm::pow(d as f64, -exponent)
}

/// `k` Gaussian clusters of `per_cluster` points around the basis vectors of
/// `ℝ^k`, each coordinate perturbed with standard deviation `sigma`.
pub fn simplex_clusters(k: usize, per_cluster: usize, sigma: f64, seed: u64) -> Result<PointCloud> {
    require(k >= 1, "k", "must be at least 1")?;
    require(per_cluster >= 1, "per_cluster", "must be at least 1")?;
    require(
        sigma >= 0.0 && sigma.is_finite(),
        "sigma",
        "must be nonnegative and finite",
    )?;
    let n = k * per_cluster;
    let mut points = Matrix::zeros(n, k);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i / per_cluster;
        let row = points.row_mut(i);
        let mut r = rng::stream(seed, Purpose::Dataset, i as u64);
        rng::fill_standard_normal(&mut r, row);
        for v in row.iter_mut() {
            *v *= sigma;
        }
        row[c] += 1.0;
        labels.push(c as i64);
    }
    let meta = GeneratorInfo::new(
        "simplex-clusters",
        &[
            ("k", k as f64),
            ("per_cluster", per_cluster as f64),
            ("sigma", sigma),
        ],
        Some(seed),
    );
    PointCloud::new(points, Some(labels), meta)
}

/// `{e_1, …, e_m, 2e_{m+1}, …, 2e_{2m}} ⊂ ℝ^{2m}` for `m = n_half`; block A
/// (label 0) is the unit half, block B (label 1) the doubled half.
pub fn doubled_frame(n_half: usize) -> Result<PointCloud> {
    require(n_half >= 1, "n_half", "must be at least 1")?;
    let n = 2 * n_half;
    let mut points = Matrix::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let block = i64::from(i >= n_half);
        points.set(i, i, 1.0 + block as f64);
        labels.push(block);
    }
    let meta = GeneratorInfo::new("doubled-frame", &[("n_half", n_half as f64)], None);
    PointCloud::new(points, Some(labels), meta)
}

/// The orthonormal frame `{e_1, …, e_n} ⊂ ℝ^n`; all pairwise distances are √2.
pub fn equidistant_simplex(n: usize) -> Result<PointCloud> {
    require(n >= 2, "n", "must be at least 2")?;
    let mut points = Matrix::zeros(n, n);
    for i in 0..n {
        points.set(i, i, 1.0);
    }
    let meta = GeneratorInfo::new("equidistant-simplex", &[("n", n as f64)], None);
    PointCloud::new(points, None, meta)
}

/// Convenience for error messages and CLI listings.
pub fn describe(info: &GeneratorInfo) -> String {
    let params: Vec<String> = info
        .params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    format!("{}({})", info.name, params.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::distance;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_rows_have_unit_norm() {
        let c = sample_sphere(200, 7, 3).unwrap();
        for row in c.points.iter_rows() {
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            sample_sphere(50, 5, 11).unwrap(),
            sample_sphere(50, 5, 11).unwrap()
        );
        assert_ne!(
            sample_sphere(50, 5, 11).unwrap().points,
            sample_sphere(50, 5, 12).unwrap().points
        );
        assert_eq!(
            simplex_clusters(3, 4, 0.2, 1).unwrap(),
            simplex_clusters(3, 4, 0.2, 1).unwrap()
        );
        assert_eq!(
            sample_split_sphere(40, 20, 2, 0.1).unwrap(),
            sample_split_sphere(40, 20, 2, 0.1).unwrap()
        );
    }

    #[test]
    fn sphere_prefix_is_stable_in_n() {
        let small = sample_sphere(10, 4, 9).unwrap();
        let big = sample_sphere(20, 4, 9).unwrap();
        assert_eq!(small.points.row(7), big.points.row(7));
    }

    #[test]
    fn split_sphere_respects_threshold() {
        let c = sample_split_sphere(300, 20, 5, DEFAULT_SPLIT_EXPONENT).unwrap();
        let t = split_threshold(20, 0.1);
        assert_abs_diff_eq!(t, 0.741134, epsilon = 1e-6);
        let labels = c.labels.as_ref().unwrap();
        for (row, &l) in c.points.iter_rows().zip(labels) {
            assert!(row[0].abs() >= t);
            assert_eq!(l, i64::from(row[0] > 0.0));
        }
    }

    #[test]
    fn split_sphere_aborts_when_nothing_is_accepted() {
        // threshold d^{1} = 20 can never be met by a unit vector
        let err = sample_split_sphere(1, 20, 0, -1.0).unwrap_err();
        assert!(matches!(err, Error::AcceptanceTooLow { accepted: 0, .. }));
    }

    #[test]
    fn simplex_clusters_without_noise_are_basis_vectors() {
        let c = simplex_clusters(4, 3, 0.0, 8).unwrap();
        assert_eq!((c.n(), c.dim()), (12, 4));
        for (i, row) in c.points.iter_rows().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if j == i / 3 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn doubled_frame_geometry() {
        let c = doubled_frame(3).unwrap();
        assert_eq!((c.n(), c.dim()), (6, 6));
        let sq =
            |i: usize, j: usize| crate::matrix::squared_distance(c.points.row(i), c.points.row(j));
        assert_abs_diff_eq!(sq(0, 1), 2.0);
        assert_abs_diff_eq!(sq(0, 4), 5.0);
        assert_abs_diff_eq!(sq(3, 5), 8.0);
        assert_eq!(c.labels.unwrap(), vec![0, 0, 0, 1, 1, 1]);
        let one = doubled_frame(1).unwrap();
        assert_abs_diff_eq!(distance(one.points.row(0), one.points.row(1)), 5f64.sqrt());
    }

    #[test]
    fn equidistant_simplex_distances() {
        let c = equidistant_simplex(6).unwrap();
        for (i, j) in crate::matrix::pairs(6) {
            assert_abs_diff_eq!(
                distance(c.points.row(i), c.points.row(j)),
                2f64.sqrt(),
                epsilon = 1e-12
            );
        }
        assert!(equidistant_simplex(1).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(sample_sphere(0, 3, 0).is_err());
        assert!(sample_sphere(3, 1, 0).is_err());
        assert!(simplex_clusters(0, 3, 0.1, 0).is_err());
        assert!(simplex_clusters(2, 3, -0.1, 0).is_err());
        assert!(doubled_frame(0).is_err());
    }
}
