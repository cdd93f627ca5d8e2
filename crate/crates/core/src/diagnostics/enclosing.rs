//! Minimum enclosing ball by Welzl's randomized recursion, for 1 ≤ s ≤ 3.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn empty(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            radius: -1.0,
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        if self.radius < 0.0 {
            return false;
        }
        let d = libm::sqrt(squared_distance(&self.center, p));
        d <= self.radius + 1e-12 * (1.0 + self.radius)
    }
}

/// Solves the small dense system `m x = b` in place by partial pivoting.
/// Returns `None` when the system is (numerically) singular.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = b[row];
        for c in row + 1..k {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Smallest ball with every support point on its boundary, within their
/// affine hull. `None` if the support is affinely dependent.
fn circumball(support: &[&[f64]], dim: usize) -> Option<Ball> {
    match support {
        [] => return Some(Ball::empty(dim)),
        [p] => {
            return Some(Ball {
                center: p.to_vec(),
                radius: 0.0,
            })
        }
        _ => {}
    }
    let origin = support[0];
    let vs: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(origin).map(|(a, o)| a - o).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = vs
        .iter()
        .map(|a| vs.iter().map(|b| 2.0 * dot(a, b)).collect())
        .collect();
    let rhs = vs.iter().map(|a| dot(a, a)).collect();
    let lambda = solve(gram, rhs)?;
    let mut center = origin.to_vec();
    for (l, v) in lambda.iter().zip(&vs) {
        for (c, x) in center.iter_mut().zip(v) {
            *c += l * x;
        }
    }
    let radius = support
        .iter()
        .map(|p| libm::sqrt(squared_distance(&center, p)))
        .fold(0.0, f64::max);
    Some(Ball { center, radius })
}

/// Ball determined by a support set; degenerate sets fall back to the
/// smallest sub-support ball that still covers all of them.
fn support_ball(support: &[&[f64]], dim: usize) -> Ball {
    if let Some(b) = circumball(support, dim) {
        return b;
    }
    let mut best: Option<Ball> = None;
    for skip in 0..support.len() {
        let sub: Vec<&[f64]> = support
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, p)| *p)
            .collect();
        let b = support_ball(&sub, dim);
        if support.iter().all(|p| b.contains(p))
            && best.as_ref().map_or(true, |c| b.radius < c.radius)
        {
            best = Some(b);
        }
    }
    best.unwrap_or_else(|| {
        // all subsets failed: use the diametral ball of the farthest pair
        let mut far = (0, 0, -1.0);
        for a in 0..support.len() {
            for c in a + 1..support.len() {
                let d = squared_distance(support[a], support[c]);
                if d > far.2 {
                    far = (a, c, d);
                }
            }
        }
        let center: Vec<f64> = support[far.0]
            .iter()
            .zip(support[far.1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let radius = support
            .iter()
            .map(|p| libm::sqrt(squared_distance(&center, p)))
            .fold(0.0, f64::max);
        Ball { center, radius }
    })
}

fn welzl<'a>(points: &[&'a [f64]], end: usize, support: &mut Vec<&'a [f64]>, dim: usize) -> Ball {
    let mut ball = support_ball(support, dim);
    if support.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        if !ball.contains(points[i]) {
            support.push(points[i]);
            ball = welzl(points, i, support, dim);
            support.pop();
        }
    }
    ball
}

/// Exact minimum enclosing ball of the rows of `y` (expected linear time).
///
/// The processing order is a fixed pseudo-random permutation, so the result
/// is deterministic.
pub fn enclosing_ball(y: &Matrix) -> Result<Ball> {
    let (n, dim) = (y.rows(), y.cols());
    if n == 0 {
        return Err(Error::TooFewPoints { min: 1, got: 0 });
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::param("y", "enclosing ball needs 1 to 3 columns"));
    }
    let mut points: Vec<&[f64]> = y.iter_rows().collect();
    let mut r = rng::stream(n as u64, Purpose::Shuffle, 0);
    for i in (1..n).rev() {
        let j = (r.next_u64() % (i as u64 + 1)) as usize;
        points.swap(i, j);
    }
    let mut support = Vec::with_capacity(dim + 1);
    let mut ball = welzl(&points, n, &mut support, dim);
    // tighten the radius to the farthest point
    ball.radius = points
        .iter()
        .map(|p| libm::sqrt(squared_distance(&ball.center, p)))
        .fold(0.0, f64::max);
    Ok(ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_points() {
        let b = enclosing_ball(&Matrix::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap()).unwrap();
        assert_abs_diff_eq!(b.center[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.center[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.radius, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn equilateral_triangle_circumradius() {
        let h = 3f64.sqrt() / 2.0;
        let b = enclosing_ball(&Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(b.radius, 0.577350, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        let same = Matrix::from_rows(&[[1.0, 2.0]; 5]).unwrap();
        assert_eq!(enclosing_ball(&same).unwrap().radius, 0.0);
        let line = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [1.5, 1.5]])
            .unwrap();
        let b = enclosing_ball(&line).unwrap();
        assert_abs_diff_eq!(b.radius, 18f64.sqrt() / 2.0, epsilon = 1e-12);
        let one = Matrix::from_rows(&[[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(
            enclosing_ball(&one).unwrap(),
            Ball {
                center: vec![4.0, 5.0, 6.0],
                radius: 0.0
            }
        );
    }

    #[test]
    fn three_dimensional_tetrahedron() {
        let pts = Matrix::from_rows(&[
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ])
        .unwrap();
        let b = enclosing_ball(&pts).unwrap();
        assert_abs_diff_eq!(b.radius, 3f64.sqrt(), epsilon = 1e-12);
        for c in &b.center {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_high_dimensions() {
        assert!(enclosing_ball(&Matrix::zeros(3, 4)).is_err());
        assert!(enclosing_ball(&Matrix::zeros(0, 2)).is_err());
    }
}
