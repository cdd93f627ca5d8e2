use alloc::vec::Vec;

use super::{enclosing_ball, DiagnosticsReport, TheoremTag};
use crate::error::{Error, Result};
use crate::matrix::{distance, Matrix};

/// Smallest point-centered ball holding a prescribed share of the points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringBall {
    pub center_index: usize,
    pub radius: f64,
    /// Points the ball must contain, center included: `⌈f · n⌉`.
    pub required: usize,
}

impl CoveringBall {
    pub fn record(&self, report: &mut DiagnosticsReport, fraction: f64) {
        let params = [("fraction", fraction)];
        report.scalar(
            "covering_ball.radius",
            self.radius,
            TheoremTag::LemmaSmallKl,
            &params,
        );
        report.scalar(
            "covering_ball.center_index",
            self.center_index as f64,
            TheoremTag::LemmaSmallKl,
            &params,
        );
    }
}

/// Over centers restricted to the points of `y`, the minimum radius of a
/// closed ball containing at least `⌈f · n⌉` points.
pub fn covering_ball(y: &Matrix, fraction: f64) -> Result<CoveringBall> {
    let n = y.rows();
    if n == 0 {
        return Err(Error::TooFewPoints { min: 1, got: 0 });
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", "must lie in (0, 1]"));
    }
    let required = (libm::ceil(fraction * n as f64) as usize).clamp(1, n);
    let radii = crate::par::map_indices(n, |i| {
        let mut d: Vec<f64> = y.iter_rows().map(|r| distance(y.row(i), r)).collect();
        d.sort_by(f64::total_cmp);
        d[required - 1]
    });
    let (center_index, radius) =
        radii
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, r)| if r < best.1 { (i, r) } else { best },
            );
    Ok(CoveringBall {
        center_index,
        radius,
        required,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremBallCheck {
    /// Best share of points strictly within distance `r` of some point.
    pub fraction_in_r_ball: f64,
    pub enclosing_radius: f64,
    /// `enclosing_radius / √r`; the collapse result predicts this stays bounded.
    pub radius_ratio: f64,
    /// `fraction_in_r_ball ≥ 1 − r`.
    pub passes: bool,
}

impl TheoremBallCheck {
    pub fn record(&self, report: &mut DiagnosticsReport, r: f64) {
        let params = [("r", r)];
        let tag = TheoremTag::ThmSphere;
        report.scalar(
            "theorem_ball.fraction_in_r_ball",
            self.fraction_in_r_ball,
            tag,
            &params,
        );
        report.scalar(
            "theorem_ball.enclosing_radius",
            self.enclosing_radius,
            tag,
            &params,
        );
        report.scalar("theorem_ball.radius_ratio", self.radius_ratio, tag, &params);
        report.scalar(
            "theorem_ball.passes",
            f64::from(u8::from(self.passes)),
            tag,
            &params,
        );
    }
}

/// Checks "a `1 − r` share of `Y` sits in an open ball of radius `r`" with
/// data-point centers, and reports the enclosing radius alongside.
pub fn theorem_ball_check(y: &Matrix, r: f64) -> Result<TheoremBallCheck> {
    let n = y.rows();
    if !(r > 0.0) {
        return Err(Error::param("r", "must be positive"));
    }
    let enclosing_radius = enclosing_ball(y)?.radius;
    let counts = crate::par::map_indices(n, |i| {
        y.iter_rows()
            .filter(|row| distance(y.row(i), row) < r)
            .count()
    });
    let best = counts.into_iter().max().unwrap_or(0);
    let fraction_in_r_ball = best as f64 / n as f64;
    Ok(TheoremBallCheck {
        fraction_in_r_ball,
        enclosing_radius,
        radius_ratio: enclosing_radius / libm::sqrt(r),
        passes: fraction_in_r_ball >= 1.0 - r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coincident_points() {
        let y = Matrix::from_rows(&[[2.0, 2.0]; 6]).unwrap();
        assert_eq!(covering_ball(&y, 0.5).unwrap().radius, 0.0);
        let check = theorem_ball_check(&y, 0.1).unwrap();
        assert_eq!(check.fraction_in_r_ball, 1.0);
        assert!(check.passes);
    }

    #[test]
    fn cross_configuration() {
        let y = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        let b = covering_ball(&y, 0.75).unwrap();
        assert_abs_diff_eq!(b.radius, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b.required, 3);
        assert_eq!(covering_ball(&y, 1.0).unwrap().radius, 2.0);
    }

    #[test]
    fn equilateral_triangle_full_cover() {
        let h = 3f64.sqrt() / 2.0;
        let y = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap();
        assert_abs_diff_eq!(covering_ball(&y, 1.0).unwrap().radius, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn antipodal_pair_fails() {
        let y = Matrix::from_rows(&[[-5.0, 0.0], [5.0, 0.0]]).unwrap();
        let check = theorem_ball_check(&y, 0.4).unwrap();
        assert_eq!(check.fraction_in_r_ball, 0.5);
        assert!(!check.passes);
        assert_abs_diff_eq!(check.enclosing_radius, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_arguments() {
        let y = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(covering_ball(&y, 0.0).is_err());
        assert!(covering_ball(&y, 1.5).is_err());
        assert!(theorem_ball_check(&y, 0.0).is_err());
    }
}
