//! Runs a list of diagnostic checks on an (input, embedding) pair.

use anyhow::{bail, ensure, Result};
use tsne_forensics_core::affinity::{affinities, uniformity_statistic};
use tsne_forensics_core::diagnostics::{
    block_stats, covering_ball, enclosing_ball, grid_collision_stats, theorem_ball_check,
    BlockPartition, DEFAULT_FAR_THRESHOLD,
};
use tsne_forensics_core::optimizer::low_dim_affinities;
use tsne_forensics_core::{
    AffinityConfig, DiagnosticsReport, Matrix, PairDistribution, TheoremTag,
};

use crate::config::DiagnosticSpec;

/// Inputs shared by every check.
pub struct DiagnosticInput<'a> {
    pub x: &'a Matrix,
    pub labels: Option<&'a [i64]>,
    pub y: &'a Matrix,
    /// Input affinities if already computed with `affinity`.
    pub p: Option<&'a PairDistribution>,
    pub affinity: &'a AffinityConfig,
}

fn partition(labels: Option<&[i64]>, n: usize) -> BlockPartition {
    match labels {
        Some(l) if l.contains(&0) && l.iter().any(|&v| v != 0) => BlockPartition::from_labels(l),
        _ => BlockPartition::halves(n),
    }
}

/// Runs `checks` in order. The grid pigeonhole bound is asserted on every
/// call with a 2-D embedding, whether or not a grid check was requested.
pub fn run(input: &DiagnosticInput<'_>, checks: &[DiagnosticSpec]) -> Result<DiagnosticsReport> {
    let (x, y) = (input.x, input.y);
    ensure!(
        x.rows() == y.rows(),
        "points have {} rows but embedding has {}",
        x.rows(),
        y.rows()
    );
    if let Some(l) = input.labels {
        ensure!(
            l.len() == x.rows(),
            "{} labels for {} points",
            l.len(),
            x.rows()
        );
    }
    let n = x.rows();

    let mut report = DiagnosticsReport::new();
    let mut p_cache: Option<PairDistribution> = None;
    let input_p = |cache: &mut Option<PairDistribution>| -> Result<PairDistribution> {
        if let Some(p) = input.p {
            return Ok(p.clone());
        }
        if cache.is_none() {
            *cache = Some(affinities(x, input.affinity)?.p);
        }
        Ok(cache.clone().unwrap())
    };

    if y.cols() == 2 && n > 0 {
        let g = checks
            .iter()
            .find_map(|c| match c {
                DiagnosticSpec::Grid { g, .. } => Some(*g),
                _ => None,
            })
            .unwrap_or(1.0);
        let stats = grid_collision_stats(x, y, g, DEFAULT_FAR_THRESHOLD)?;
        if !stats.pigeonhole_holds {
            bail!(
                "pigeonhole bound violated: fraction_alone {} > cells/n {}",
                stats.fraction_alone,
                stats.cell_count as f64 / n as f64
            );
        }
    }

    for check in checks {
        match *check {
            DiagnosticSpec::CoveringBall { fraction } => {
                covering_ball(y, fraction)?.record(&mut report, fraction)
            }
            DiagnosticSpec::Grid { g, far_threshold } => {
                let stats = grid_collision_stats(x, y, g, far_threshold)?;
                ensure!(stats.pigeonhole_holds, "pigeonhole bound violated");
                stats.record(&mut report, g, far_threshold);
                report.scalar(
                    "grid.pigeonhole_bound",
                    stats.cell_count as f64 / n as f64,
                    TheoremTag::PropVolume,
                    &[("g", g), ("far_threshold", far_threshold)],
                );
            }
            DiagnosticSpec::Blocks { sigma } => {
                let p = affinities(x, &AffinityConfig::fixed_sigma(sigma))?.p;
                let (q, _) = low_dim_affinities(y)?;
                let stats = block_stats(&p, &q, &partition(input.labels, n), sigma)?;
                ensure!(stats.chain_holds, "block divergence chain violated");
                stats.record(&mut report, sigma);
            }
            DiagnosticSpec::TheoremBall { r } => theorem_ball_check(y, r)?.record(&mut report, r),
            DiagnosticSpec::Uniformity => {
                let p = input_p(&mut p_cache)?;
                let u = PairDistribution::uniform(n)?;
                let tag = TheoremTag::LemmaConcentration;
                report.scalar("uniformity.statistic", uniformity_statistic(&p), tag, &[]);
                report.scalar("uniformity.kl_from_uniform", p.kl_divergence(&u)?, tag, &[]);
                report.scalar("uniformity.tv_from_uniform", p.tv_distance(&u)?, tag, &[]);
                report.scalar(
                    "uniformity.chi_squared_from_uniform",
                    p.chi_squared(&u)?,
                    tag,
                    &[],
                );
            }
            DiagnosticSpec::Enclosing => {
                let ball = enclosing_ball(y)?;
                report.scalar("enclosing.radius", ball.radius, TheoremTag::ThmSphere, &[]);
            }
            DiagnosticSpec::Objective => {
                let p = input_p(&mut p_cache)?;
                let (q, _) = low_dim_affinities(y)?;
                report.scalar(
                    "objective.kl",
                    p.kl_divergence(&q)?,
                    TheoremTag::PropDoubledFrame,
                    &[],
                );
            }
        }
    }
    Ok(report)
}
