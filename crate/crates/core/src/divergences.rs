//! Probability-vector primitives: entropy, perplexity, KL, total variation
//! and chi-squared.
//!
//! All logarithms are natural. `0 · log 0` is taken to be `0`. Sums run left
//! to right over the vector so results are bit-reproducible.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{pair_count, pair_index};

/// Tolerance on `Σ p = 1` when a vector crosses an API boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Tolerance the constructions in this crate aim for.
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-9;

/// Checks that `dist` is nonnegative and sums to one within
/// [`BOUNDARY_TOLERANCE`].
pub fn validate(dist: &[f64]) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".into()));
    }
    let mut total = 0.0;
    for (k, &p) in dist.iter().enumerate() {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidDistribution(format!("entry {k} is {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > BOUNDARY_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}"
        )));
    }
    Ok(())
}

fn check_same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(())
}

/// `-Σ p log p` in nats.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    validate(dist)?;
    Ok(entropy_unchecked(dist))
}

pub(crate) fn entropy_unchecked(dist: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in dist {
        if p > 0.0 {
            h -= p * libm::log(p);
        }
    }
    h
}

/// `exp(H)`, the effective number of outcomes.
pub fn perplexity(dist: &[f64]) -> Result<f64> {
    shannon_entropy(dist).map(libm::exp)
}

/// `D(p‖q) = Σ p log(p/q)`.
///
/// Returns `f64::INFINITY` (not an error) when `q` vanishes somewhere `p` has
/// mass.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_same_len(p, q)?;
    validate(p)?;
    validate(q)?;
    Ok(kl_unchecked(p, q))
}

pub(crate) fn kl_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pk, &qk) in p.iter().zip(q) {
        if pk > 0.0 {
            if qk <= 0.0 {
                return f64::INFINITY;
            }
            d += pk * libm::log(pk / qk);
        }
    }
    d
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_same_len(p, q)?;
    validate(p)?;
    validate(q)?;
    Ok(tv_unchecked(p, q))
}

pub(crate) fn tv_unchecked(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `Σ (p − q)² / q`. Undefined, and an error, when some `q_k` is zero.
pub fn chi_squared(p: &[f64], q: &[f64]) -> Result<f64> {
    check_same_len(p, q)?;
    validate(p)?;
    validate(q)?;
    let mut chi = 0.0;
    for (k, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        if qk <= 0.0 {
            return Err(Error::ZeroReferenceMass { index: k });
        }
        let diff = pk - qk;
        chi += diff * diff / qk;
    }
    Ok(chi)
}

/// A distribution over the `C(n,2)` unordered pairs of `n` points, stored in
/// the order of [`crate::matrix::pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    n: usize,
    mass: Vec<f64>,
}

impl PairDistribution {
    pub fn new(n: usize, mass: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewPoints { min: 2, got: n });
        }
        if mass.len() != pair_count(n) {
            return Err(Error::SizeMismatch {
                expected: pair_count(n),
                found: mass.len(),
            });
        }
        validate(&mass)?;
        Ok(Self { n, mass })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts(n: usize, mass: Vec<f64>) -> Self {
        debug_assert_eq!(mass.len(), pair_count(n));
        Self { n, mass }
    }

    /// The uniform distribution `U` over pairs.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewPoints { min: 2, got: n });
        }
        let m = pair_count(n);
        Ok(Self {
            n,
            mass: alloc::vec![1.0 / m as f64; m],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_masses(self) -> Vec<f64> {
        self.mass
    }

    /// Mass of the unordered pair `{i, j}`, `i ≠ j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[pair_index(self.n, i, j)]
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    fn same_support(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn kl_divergence(&self, other: &Self) -> Result<f64> {
        self.same_support(other)?;
        kl_divergence(&self.mass, &other.mass)
    }

    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        self.same_support(other)?;
        tv_distance(&self.mass, &other.mass)
    }

    pub fn chi_squared(&self, other: &Self) -> Result<f64> {
        self.same_support(other)?;
        chi_squared(&self.mass, &other.mass)
    }
}

/// Conditional distribution `p_{·|i}` over the other `n − 1` points, indexed
/// by `j` in increasing order with `i` skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalRow {
    pub anchor: usize,
    pub probs: Vec<f64>,
}

impl ConditionalRow {
    /// Probability assigned to point `j ≠ anchor`.
    #[inline]
    pub fn prob(&self, j: usize) -> f64 {
        debug_assert_ne!(j, self.anchor);
        if j < self.anchor {
            self.probs[j]
        } else {
            self.probs[j - 1]
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.probs)
    }

    pub fn perplexity(&self) -> f64 {
        libm::exp(self.entropy())
    }
}
