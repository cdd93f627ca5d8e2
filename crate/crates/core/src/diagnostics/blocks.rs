//! Block-level masses for a two-block partition of the points.
//!
//! Summing `P` and `Q` over the blocks `(A,A)`, `(A,B)`, `(B,B)` gives
//! three-point distributions `𝒫`, `𝒬`. The chain rule gives
//! `D(P‖Q) = D(𝒫‖𝒬) + Σ 𝒫_IJ D(P|IJ ‖ Q|IJ) ≥ D(𝒫‖𝒬)`, and Pinsker gives
//! `D(𝒫‖𝒬) ≥ 2 dTV(𝒫,𝒬)²`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{DiagnosticsReport, StatValue, TheoremTag};
use crate::divergences::{kl_unchecked, tv_unchecked, PairDistribution};
use crate::error::{Error, Result};

/// Rounding slack on the chain-rule inequalities.
const CHAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl BlockPartition {
    /// Validates that `a` and `b` are disjoint and together cover `0..n`.
    pub fn new(a: Vec<usize>, b: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in a.iter().chain(&b) {
            if i >= n {
                return Err(Error::InvalidPartition(format!(
                    "index {i} out of range for n = {n}"
                )));
            }
            if core::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("index {i} appears twice")));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "index {missing} is in neither block"
            )));
        }
        Ok(Self { a, b })
    }

    /// First `n / 2` points in A, the rest in B.
    pub fn halves(n: usize) -> Self {
        Self {
            a: (0..n / 2).collect(),
            b: (n / 2..n).collect(),
        }
    }

    /// Label `0` goes to A, anything else to B.
    pub fn from_labels(labels: &[i64]) -> Self {
        let (a, b): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i] == 0);
        Self { a, b }
    }

    pub fn len(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `p₀* = 2 / (1 + e^{−3/(2σ²)})`, the limit of `C(2n,2) p_ij` inside block A
/// of the doubled frame.
pub fn p0_star(sigma: f64) -> f64 {
    2.0 / (1.0 + libm::exp(-3.0 / (2.0 * sigma * sigma)))
}

/// `p₁* = 2 − p₀*`, the limit inside block B.
pub fn p1_star(sigma: f64) -> f64 {
    2.0 - p0_star(sigma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    /// Masses on `(A,A)`, `(A,B)`, `(B,B)`.
    pub p_blocks: [f64; 3],
    pub q_blocks: [f64; 3],
    pub p0_star: f64,
    pub p1_star: f64,
    pub block_kl: f64,
    pub block_tv: f64,
    /// `2 dTV(𝒫,𝒬)²`.
    pub pinsker_lower_bound: f64,
    pub full_kl: f64,
    /// `pinsker_lower_bound ≤ block_kl ≤ full_kl` (up to `1e-12` rounding).
    pub chain_holds: bool,
}

impl BlockStats {
    pub fn record(&self, report: &mut DiagnosticsReport, sigma: f64) {
        let params = [("sigma", sigma)];
        let tag = TheoremTag::PropDoubledFrame;
        report.push(
            "blocks.p_blocks",
            StatValue::Vector(self.p_blocks.to_vec()),
            tag,
            &params,
        );
        report.push(
            "blocks.q_blocks",
            StatValue::Vector(self.q_blocks.to_vec()),
            tag,
            &params,
        );
        report.scalar("blocks.p0_star", self.p0_star, tag, &params);
        report.scalar("blocks.p1_star", self.p1_star, tag, &params);
        report.scalar("blocks.block_kl", self.block_kl, tag, &params);
        report.scalar("blocks.block_tv", self.block_tv, tag, &params);
        report.scalar(
            "blocks.pinsker_lower_bound",
            self.pinsker_lower_bound,
            tag,
            &params,
        );
        report.scalar("blocks.full_kl", self.full_kl, tag, &params);
    }
}

pub fn block_stats(
    p: &PairDistribution,
    q: &PairDistribution,
    partition: &BlockPartition,
    sigma: f64,
) -> Result<BlockStats> {
    let n = p.n();
    if q.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: q.n(),
        });
    }
    let partition = BlockPartition::new(partition.a.clone(), partition.b.clone(), n)?;
    let mut in_b = vec![false; n];
    for &i in &partition.b {
        in_b[i] = true;
    }
    let mut p_blocks = [0.0; 3];
    let mut q_blocks = [0.0; 3];
    for (k, (i, j)) in crate::matrix::pairs(n).enumerate() {
        let block = usize::from(in_b[i]) + usize::from(in_b[j]);
        p_blocks[block] += p.masses()[k];
        q_blocks[block] += q.masses()[k];
    }
    let block_kl = kl_unchecked(&p_blocks, &q_blocks);
    let block_tv = tv_unchecked(&p_blocks, &q_blocks);
    let pinsker_lower_bound = 2.0 * block_tv * block_tv;
    let full_kl = kl_unchecked(p.masses(), q.masses());
    Ok(BlockStats {
        p_blocks,
        q_blocks,
        p0_star: p0_star(sigma),
        p1_star: p1_star(sigma),
        block_kl,
        block_tv,
        pinsker_lower_bound,
        full_kl,
        chain_holds: pinsker_lower_bound <= block_kl + CHAIN_SLACK
            && block_kl <= full_kl + CHAIN_SLACK,
    })
}
