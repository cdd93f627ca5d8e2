//! Pigeonhole statistics on a grid laid over a 2-D embedding.

use alloc::vec::Vec;

use super::{enclosing_ball, DiagnosticsReport, TheoremTag};
use crate::error::{Error, Result};
use crate::matrix::{distance, Matrix};

pub const DEFAULT_FAR_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridStats {
    /// `max ‖y_i − c‖` for `c` the enclosing-ball center.
    pub bound_radius: f64,
    pub cells_per_side: usize,
    pub cell_count: usize,
    pub cell_side: f64,
    pub fraction_alone: f64,
    pub fraction_far_but_close: f64,
    /// `3 B g / √n`, the output distance counted as "close".
    pub close_threshold: f64,
    /// Largest output distance between two points sharing a cell.
    pub max_same_cell_distance: f64,
    /// `fraction_alone ≤ cell_count / n`.
    pub pigeonhole_holds: bool,
}

impl GridStats {
    pub fn record(&self, report: &mut DiagnosticsReport, g: f64, far_threshold: f64) {
        let params = [("g", g), ("far_threshold", far_threshold)];
        let tag = TheoremTag::PropVolume;
        report.scalar("grid.bound_radius", self.bound_radius, tag, &params);
        report.scalar("grid.cell_count", self.cell_count as f64, tag, &params);
        report.scalar("grid.cell_side", self.cell_side, tag, &params);
        report.scalar("grid.fraction_alone", self.fraction_alone, tag, &params);
        report.scalar(
            "grid.fraction_far_but_close",
            self.fraction_far_but_close,
            tag,
            &params,
        );
        report.scalar("grid.close_threshold", self.close_threshold, tag, &params);
        report.scalar(
            "grid.max_same_cell_distance",
            self.max_same_cell_distance,
            tag,
            &params,
        );
    }
}

fn cell_coordinate(v: f64, low: f64, side: f64, m: usize) -> usize {
    if side <= 0.0 {
        return 0;
    }
    let k = libm::floor((v - low) / side);
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(m - 1)
    }
}

/// Splits `[−B, B]²` (around the enclosing-ball center of `y`) into
/// `⌈√n / g⌉²` half-open cells and counts
///
/// * points alone in their cell, and
/// * points `x` with some `x′` at input distance `≥ far_threshold` whose
///   outputs are within `3 B g / √n`.
pub fn grid_collision_stats(
    x: &Matrix,
    y: &Matrix,
    g: f64,
    far_threshold: f64,
) -> Result<GridStats> {
    let n = y.rows();
    if n == 0 {
        return Err(Error::TooFewPoints { min: 1, got: 0 });
    }
    if x.rows() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: x.rows(),
        });
    }
    if y.cols() != 2 {
        return Err(Error::param("y", "grid statistics need a 2-D embedding"));
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::param("g", "must be positive and finite"));
    }
    let center = enclosing_ball(y)?.center;
    let bound_radius = y
        .iter_rows()
        .map(|r| distance(r, &center))
        .fold(0.0, f64::max);
    let sqrt_n = libm::sqrt(n as f64);
    let m = (libm::ceil(sqrt_n / g) as usize).max(1);
    let cell_side = 2.0 * bound_radius / m as f64;

    let cells: Vec<usize> = y
        .iter_rows()
        .map(|r| {
            let cx = cell_coordinate(r[0], center[0] - bound_radius, cell_side, m);
            let cy = cell_coordinate(r[1], center[1] - bound_radius, cell_side, m);
            cx * m + cy
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (cells[i], i));
    let mut alone = 0usize;
    let mut max_same_cell_distance = 0.0f64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cells[order[end]] == cells[order[start]] {
            end += 1;
        }
        if end - start == 1 {
            alone += 1;
        }
        for a in start..end {
            for b in a + 1..end {
                max_same_cell_distance =
                    max_same_cell_distance.max(distance(y.row(order[a]), y.row(order[b])));
            }
        }
        start = end;
    }

    let close_threshold = 3.0 * bound_radius * g / sqrt_n;
    let witnessed = crate::par::map_indices(n, |i| {
        (0..n).any(|j| {
            j != i
                && distance(y.row(i), y.row(j)) <= close_threshold
                && distance(x.row(i), x.row(j)) >= far_threshold
        })
    });
    let far_close = witnessed.iter().filter(|&&w| w).count();

    let cell_count = m * m;
    let stats = GridStats {
        bound_radius,
        cells_per_side: m,
        cell_count,
        cell_side,
        fraction_alone: alone as f64 / n as f64,
        fraction_far_but_close: far_close as f64 / n as f64,
        close_threshold,
        max_same_cell_distance,
        pigeonhole_holds: alone <= cell_count,
    };
    debug_assert!(stats.pigeonhole_holds);
    Ok(stats)
}
