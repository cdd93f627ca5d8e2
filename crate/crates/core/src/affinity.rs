//! Input-space affinities `P`.
//!
//! Each point `i` gets a Gaussian conditional row
//! `p_{j|i} ∝ exp(−‖x_i − x_j‖² / 2σ_i²)` over the other points; the rows are
//! then symmetrized into a distribution over unordered pairs,
//! `p_ij = (p_{i|j} + p_{j|i}) / n`.
//!
//! Bandwidths are either fixed or calibrated so the row perplexity hits a
//! target. A target of at least `n − 1` cannot be met by any finite bandwidth;
//! such rows get [`Bandwidth::Infinite`] and are exactly uniform.

use alloc::vec;
use alloc::vec::Vec;

use crate::divergences::{ConditionalRow, PairDistribution};
use crate::error::{Error, Result};
use crate::matrix::{pair_count, squared_distance_matrix, Matrix};

pub const SIGMA_MIN: f64 = 1e-20;
pub const SIGMA_MAX: f64 = 1e20;
pub const DEFAULT_ENTROPY_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_MAX_SEARCH_ITERATIONS: usize = 100;
pub const DEFAULT_PERPLEXITY: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Bandwidth {
    Finite(f64),
    /// `σ = ∞`: the row is uniform over the other points.
    Infinite,
}

impl Bandwidth {
    pub fn is_infinite(self) -> bool {
        matches!(self, Bandwidth::Infinite)
    }

    fn validate(self) -> Result<()> {
        match self {
            Bandwidth::Finite(s) if !(s > 0.0) || !s.is_finite() => Err(Error::param(
                "sigma",
                alloc::format!("must be positive and finite, got {s}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BandwidthMode {
    FixedSigma(f64),
    Perplexity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffinityConfig {
    pub mode: BandwidthMode,
    /// Allowed `|H(P_i) − log p|`, in nats.
    pub entropy_tolerance: f64,
    pub max_search_iterations: usize,
}

impl Default for AffinityConfig {
    fn default() -> Self {
        Self::perplexity(DEFAULT_PERPLEXITY)
    }
}

impl AffinityConfig {
    pub fn perplexity(p: f64) -> Self {
        Self {
            mode: BandwidthMode::Perplexity(p),
            entropy_tolerance: DEFAULT_ENTROPY_TOLERANCE,
            max_search_iterations: DEFAULT_MAX_SEARCH_ITERATIONS,
        }
    }

    pub fn fixed_sigma(sigma: f64) -> Self {
        Self {
            mode: BandwidthMode::FixedSigma(sigma),
            ..Self::perplexity(DEFAULT_PERPLEXITY)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            BandwidthMode::FixedSigma(s) => Bandwidth::Finite(s).validate()?,
            BandwidthMode::Perplexity(p) if !(p > 0.0) || !p.is_finite() => {
                return Err(Error::param(
                    "perplexity",
                    alloc::format!("must be positive and finite, got {p}"),
                ));
            }
            BandwidthMode::Perplexity(_) => {}
        }
        if !(self.entropy_tolerance > 0.0) {
            return Err(Error::param("entropy_tolerance", "must be positive"));
        }
        if self.max_search_iterations == 0 {
            return Err(Error::param("max_search_iterations", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthResult {
    pub bandwidths: Vec<Bandwidth>,
    pub achieved_perplexities: Vec<f64>,
    /// Whether the row met the entropy tolerance. Infinite-bandwidth rows
    /// count as converged.
    pub converged: Vec<bool>,
}

impl BandwidthResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Normalized Gaussian weights of one row, with the largest exponent
/// subtracted before exponentiation. Returns `(probs, entropy)`.
fn gaussian_row(sq_dists: &[f64], anchor: usize, bandwidth: Bandwidth) -> (Vec<f64>, f64) {
    let m = sq_dists.len() - 1;
    let Bandwidth::Finite(sigma) = bandwidth else {
        let u = 1.0 / m as f64;
        return (vec![u; m], libm::log(m as f64));
    };
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut exps = Vec::with_capacity(m);
    let mut max_e = f64::NEG_INFINITY;
    for (j, &d) in sq_dists.iter().enumerate() {
        if j != anchor {
            let e = -d * scale;
            max_e = max_e.max(e);
            exps.push(e);
        }
    }
    let mut total = 0.0;
    let mut weights = Vec::with_capacity(m);
    for e in &mut exps {
        *e -= max_e;
        let w = libm::exp(*e);
        total += w;
        weights.push(w);
    }
    // H = log S − Σ p_j e_j with shifted exponents e_j ≤ 0
    let mut weighted = 0.0;
    for (w, e) in weights.iter_mut().zip(&exps) {
        *w /= total;
        weighted += *w * *e;
    }
    let entropy = libm::log(total) - weighted;
    (weights, entropy.max(0.0))
}

fn check_points(points: &Matrix) -> Result<()> {
    if points.rows() < 2 {
        return Err(Error::TooFewPoints {
            min: 2,
            got: points.rows(),
        });
    }
    Ok(())
}

/// Gaussian conditional rows for the given per-point bandwidths.
pub fn conditional_rows(points: &Matrix, bandwidths: &[Bandwidth]) -> Result<Vec<ConditionalRow>> {
    check_points(points)?;
    if bandwidths.len() != points.rows() {
        return Err(Error::SizeMismatch {
            expected: points.rows(),
            found: bandwidths.len(),
        });
    }
    for b in bandwidths {
        b.validate()?;
    }
    let d2 = squared_distance_matrix(points);
    Ok(rows_from_distances(&d2, bandwidths))
}

fn rows_from_distances(d2: &Matrix, bandwidths: &[Bandwidth]) -> Vec<ConditionalRow> {
    crate::par::map_indices(d2.rows(), |i| {
        let (probs, _) = gaussian_row(d2.row(i), i, bandwidths[i]);
        ConditionalRow { anchor: i, probs }
    })
}

/// Calibrates every bandwidth so the row entropy equals `log p`.
///
/// The search runs on `log σ` over `[1e-20, 1e20]`: it starts at `σ = 1`,
/// steps by a factor of ten until the target is bracketed, then bisects.
/// Rows that cannot reach the target within `max_search_iterations` keep
/// their closest bandwidth; `achieved_perplexities` records what they got.
pub fn bandwidth_search(points: &Matrix, config: &AffinityConfig) -> Result<BandwidthResult> {
    check_points(points)?;
    config.validate()?;
    let BandwidthMode::Perplexity(target) = config.mode else {
        return Err(Error::param(
            "mode",
            "bandwidth search needs a perplexity target",
        ));
    };
    let d2 = squared_distance_matrix(points);
    Ok(search_from_distances(&d2, target, config))
}

fn search_from_distances(d2: &Matrix, target: f64, config: &AffinityConfig) -> BandwidthResult {
    let n = d2.rows();
    if target >= (n - 1) as f64 {
        return BandwidthResult {
            bandwidths: vec![Bandwidth::Infinite; n],
            achieved_perplexities: vec![(n - 1) as f64; n],
            converged: vec![true; n],
        };
    }
    let rows = crate::par::map_indices(n, |i| search_row(d2.row(i), i, target, config));
    let mut out = BandwidthResult {
        bandwidths: Vec::with_capacity(n),
        achieved_perplexities: Vec::with_capacity(n),
        converged: Vec::with_capacity(n),
    };
    for (sigma, h, ok) in rows {
        out.bandwidths.push(Bandwidth::Finite(sigma));
        out.achieved_perplexities.push(libm::exp(h));
        out.converged.push(ok);
    }
    out
}

fn search_row(
    sq_dists: &[f64],
    anchor: usize,
    target: f64,
    config: &AffinityConfig,
) -> (f64, f64, bool) {
    let goal = libm::log(target);
    let tol = config.entropy_tolerance;
    let (log_min, log_max) = (libm::log(SIGMA_MIN), libm::log(SIGMA_MAX));
    let entropy_at =
        |log_sigma: f64| gaussian_row(sq_dists, anchor, Bandwidth::Finite(libm::exp(log_sigma))).1;

    let step = core::f64::consts::LN_10;
    let mut lo = log_min;
    let mut hi = log_max;
    let mut bracketed_lo = false;
    let mut bracketed_hi = false;
    let mut x = 0.0;
    let mut best = (x, f64::NAN, f64::INFINITY);

    for _ in 0..config.max_search_iterations {
        let h = entropy_at(x);
        let err = (h - goal).abs();
        if err < best.2 {
            best = (x, h, err);
        }
        if err <= tol {
            break;
        }
        // entropy is nondecreasing in σ
        if h < goal {
            lo = x;
            bracketed_lo = true;
        } else {
            hi = x;
            bracketed_hi = true;
        }
        let next = match (bracketed_lo, bracketed_hi) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => (x + step).min(log_max),
            (false, true) => (x - step).max(log_min),
            (false, false) => unreachable!(),
        };
        if next == x {
            break;
        }
        x = next;
    }
    let (log_sigma, h, err) = best;
    (libm::exp(log_sigma), h, err <= tol)
}

/// `p_ij = (p_{i|j} + p_{j|i}) / n`.
pub fn symmetrize(rows: &[ConditionalRow]) -> Result<PairDistribution> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFewPoints { min: 2, got: n });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.anchor != i {
            return Err(Error::param(
                "rows",
                alloc::format!("row {i} is anchored at {}", row.anchor),
            ));
        }
        if row.probs.len() != n - 1 {
            return Err(Error::SizeMismatch {
                expected: n - 1,
                found: row.probs.len(),
            });
        }
    }
    let inv_n = 1.0 / n as f64;
    let mut mass = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            mass.push((rows[i].prob(j) + rows[j].prob(i)) * inv_n);
        }
    }
    Ok(PairDistribution::from_parts(n, mass))
}

/// `max_ij |C(n,2) · p_ij − 1|`; zero exactly when `p` is uniform.
pub fn uniformity_statistic(p: &PairDistribution) -> f64 {
    let masses = p.masses();
    // Equal masses of a distribution are exactly 1/C(n,2); skip the rounding.
    if masses.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let m = p.len() as f64;
    masses
        .iter()
        .fold(0.0f64, |acc, &v| acc.max((m * v - 1.0).abs()))
}

/// Everything [`affinities`] computes on the way to `P`.
#[derive(Debug, Clone)]
pub struct Affinities {
    pub p: PairDistribution,
    pub bandwidths: BandwidthResult,
}

/// Runs the whole pipeline: distances, bandwidths, conditional rows, `P`.
pub fn affinities(points: &Matrix, config: &AffinityConfig) -> Result<Affinities> {
    check_points(points)?;
    config.validate()?;
    let n = points.rows();
    let d2 = squared_distance_matrix(points);
    let bandwidths = match config.mode {
        BandwidthMode::FixedSigma(sigma) => {
            let rows = crate::par::map_indices(n, |i| {
                gaussian_row(d2.row(i), i, Bandwidth::Finite(sigma)).1
            });
            BandwidthResult {
                bandwidths: vec![Bandwidth::Finite(sigma); n],
                achieved_perplexities: rows.into_iter().map(libm::exp).collect(),
                converged: vec![true; n],
            }
        }
        BandwidthMode::Perplexity(target) => search_from_distances(&d2, target, config),
    };
    let rows = rows_from_distances(&d2, &bandwidths.bandwidths);
    let p = symmetrize(&rows)?;
    Ok(Affinities { p, bandwidths })
}
