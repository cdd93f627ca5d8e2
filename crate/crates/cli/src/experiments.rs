//! Named, preconfigured runs matching the paper's figures.

use anyhow::{bail, Result};
use tsne_forensics_core::{AffinityConfig, OptimizerConfig};

use crate::config::{
    ColorBy, DatasetSpec, DiagnosticSpec, ExperimentConfig, PlotSpec, DEFAULT_SNAPSHOTS,
};

pub const NAMES: [&str; 8] = [
    "figure1-simplex",
    "sphere-d2",
    "sphere-d3",
    "sphere-d5",
    "sphere-d20",
    "sphere-d100000",
    "split-sphere-d20",
    "doubled-frame",
];

/// Dimension used by `sphere-d100000` unless the full run is requested.
pub const DOWNSCALED_D: usize = 20_000;

pub struct Preset {
    pub config: ExperimentConfig,
    /// Printed before a long-running experiment starts.
    pub warning: Option<String>,
}

fn sphere_checks() -> Vec<DiagnosticSpec> {
    vec![
        DiagnosticSpec::Uniformity,
        DiagnosticSpec::Objective,
        DiagnosticSpec::Enclosing,
        DiagnosticSpec::CoveringBall { fraction: 0.9 },
        DiagnosticSpec::TheoremBall { r: 0.1 },
        DiagnosticSpec::Grid {
            g: 1.0,
            far_threshold: 0.2,
        },
    ]
}

/// Builds the preset `name` with dataset and initialization seed `seed`.
/// `full` selects paper-scale dimensions where a preset downscales.
pub fn preset(name: &str, seed: u64, full: bool, out_dir: &str) -> Result<Preset> {
    let base = |dataset, snapshots: &[usize], plots| ExperimentConfig {
        name: name.into(),
        dataset,
        seed,
        affinity: AffinityConfig::default(),
        optimizer: OptimizerConfig::default(),
        snapshot_iterations: snapshots.to_vec(),
        diagnostics: sphere_checks(),
        plots,
        output_dir: out_dir.into(),
    };
    let low_d_plots = PlotSpec {
        data_panel: Some(ColorBy::Coordinate(0)),
        ..PlotSpec::default()
    };
    let low_d_snapshots = [0, 10, 500, 510, 1000];
    let mut warning = None;
    let config = match name {
        "figure1-simplex" => {
            let mut c = base(
                DatasetSpec::SimplexClusters {
                    k: 10,
                    per_cluster: 100,
                    sigma: 0.2,
                },
                &[1000],
                PlotSpec {
                    color_by: ColorBy::Label,
                    pca_panel: true,
                    ..PlotSpec::default()
                },
            );
            c.diagnostics = vec![
                DiagnosticSpec::Objective,
                DiagnosticSpec::Enclosing,
                DiagnosticSpec::CoveringBall { fraction: 0.9 },
            ];
            c
        }
        "sphere-d2" => base(
            DatasetSpec::Sphere { n: 1000, d: 2 },
            &low_d_snapshots,
            low_d_plots,
        ),
        "sphere-d3" => base(
            DatasetSpec::Sphere { n: 1000, d: 3 },
            &low_d_snapshots,
            low_d_plots,
        ),
        "sphere-d5" => base(
            DatasetSpec::Sphere { n: 1000, d: 5 },
            &low_d_snapshots,
            low_d_plots,
        ),
        "sphere-d20" => base(
            DatasetSpec::Sphere { n: 1000, d: 20 },
            &DEFAULT_SNAPSHOTS,
            PlotSpec::default(),
        ),
        "sphere-d100000" => {
            let d = if full { 100_000 } else { DOWNSCALED_D };
            let pair_ops = 1000f64 * 999.0 / 2.0 * d as f64;
            warning = Some(format!(
                "sphere-d100000 runs at d = {d}{}; building P costs about {pair_ops:.1e} scalar operations",
                if full { "" } else { " (pass --full for d = 100000)" }
            ));
            base(
                DatasetSpec::Sphere { n: 1000, d },
                &DEFAULT_SNAPSHOTS,
                PlotSpec::default(),
            )
        }
        "split-sphere-d20" => base(
            DatasetSpec::SplitSphere {
                n: 1000,
                d: 20,
                threshold_exponent: 0.1,
            },
            &[10, 500, 510, 1000],
            PlotSpec {
                color_by: ColorBy::Coordinate(1),
                data_panel: Some(ColorBy::Coordinate(1)),
                final_panel: Some(ColorBy::Label),
                pca_panel: false,
            },
        ),
        "doubled-frame" => {
            let mut c = base(
                DatasetSpec::DoubledFrame { n_half: 50 },
                &DEFAULT_SNAPSHOTS,
                PlotSpec {
                    color_by: ColorBy::Label,
                    ..PlotSpec::default()
                },
            );
            c.affinity = AffinityConfig::fixed_sigma(1.0);
            c.diagnostics = vec![
                DiagnosticSpec::Blocks { sigma: 1.0 },
                DiagnosticSpec::Objective,
                DiagnosticSpec::Uniformity,
                DiagnosticSpec::Enclosing,
                DiagnosticSpec::Grid {
                    g: 1.0,
                    far_threshold: 0.2,
                },
            ];
            c
        }
        other => bail!(
            "unknown experiment {other:?}; expected one of {}",
            NAMES.join(", ")
        ),
    };
    Ok(Preset {
        config: config.with_seed(seed),
        warning,
    })
}
