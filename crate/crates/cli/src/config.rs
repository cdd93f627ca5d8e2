//! Experiment configuration and its content hash.

use std::path::Path;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tsne_forensics_core::datasets::{self, DEFAULT_SPLIT_EXPONENT};
use tsne_forensics_core::diagnostics::DEFAULT_FAR_THRESHOLD;
use tsne_forensics_core::{AffinityConfig, OptimizerConfig, PointCloud};

use crate::io;

pub const DEFAULT_SNAPSHOTS: [usize; 6] = [10, 100, 500, 510, 600, 1000];

fn default_split_exponent() -> f64 {
    DEFAULT_SPLIT_EXPONENT
}

fn default_far_threshold() -> f64 {
    DEFAULT_FAR_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    Sphere {
        n: usize,
        d: usize,
    },
    SplitSphere {
        n: usize,
        d: usize,
        #[serde(default = "default_split_exponent")]
        threshold_exponent: f64,
    },
    SimplexClusters {
        k: usize,
        per_cluster: usize,
        sigma: f64,
    },
    DoubledFrame {
        n_half: usize,
    },
    EquidistantSimplex {
        n: usize,
    },
    /// A point CSV already on disk.
    Csv {
        path: String,
    },
}

impl DatasetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetSpec::Sphere { .. } => "sphere",
            DatasetSpec::SplitSphere { .. } => "split-sphere",
            DatasetSpec::SimplexClusters { .. } => "simplex-clusters",
            DatasetSpec::DoubledFrame { .. } => "doubled-frame",
            DatasetSpec::EquidistantSimplex { .. } => "equidistant-simplex",
            DatasetSpec::Csv { .. } => "csv",
        }
    }

    pub fn load(&self, seed: u64) -> Result<PointCloud> {
        Ok(match *self {
            DatasetSpec::Sphere { n, d } => datasets::sample_sphere(n, d, seed)?,
            DatasetSpec::SplitSphere {
                n,
                d,
                threshold_exponent,
            } => datasets::sample_split_sphere(n, d, seed, threshold_exponent)?,
            DatasetSpec::SimplexClusters {
                k,
                per_cluster,
                sigma,
            } => datasets::simplex_clusters(k, per_cluster, sigma, seed)?,
            DatasetSpec::DoubledFrame { n_half } => datasets::doubled_frame(n_half)?,
            DatasetSpec::EquidistantSimplex { n } => datasets::equidistant_simplex(n)?,
            DatasetSpec::Csv { ref path } => {
                let table = io::read_points(Path::new(path))?;
                let meta = datasets::GeneratorInfo {
                    name: "csv".into(),
                    params: Vec::new(),
                    seed: None,
                };
                PointCloud::new(table.points, table.labels, meta)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiagnosticSpec {
    CoveringBall {
        fraction: f64,
    },
    Grid {
        g: f64,
        #[serde(default = "default_far_threshold")]
        far_threshold: f64,
    },
    /// Block-collapsed divergences; `sigma` is the fixed input bandwidth.
    Blocks {
        sigma: f64,
    },
    TheoremBall {
        r: f64,
    },
    /// Distance of P from uniform.
    Uniformity,
    Enclosing,
    /// D(P‖Q) of the embedding.
    Objective,
}

impl DiagnosticSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DiagnosticSpec::CoveringBall { .. } => "covering-ball",
            DiagnosticSpec::Grid { .. } => "grid",
            DiagnosticSpec::Blocks { .. } => "blocks",
            DiagnosticSpec::TheoremBall { .. } => "theorem-ball",
            DiagnosticSpec::Uniformity => "uniformity",
            DiagnosticSpec::Enclosing => "enclosing",
            DiagnosticSpec::Objective => "objective",
        }
    }
}

/// What a scatter plot's color encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorBy {
    /// A coordinate of the input data, zero-based.
    Coordinate(usize),
    Label,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotSpec {
    /// Color of every snapshot panel.
    pub color_by: ColorBy,
    /// Panel of the first two input coordinates, if wanted.
    pub data_panel: Option<ColorBy>,
    /// Extra panel of the final embedding with its own coloring.
    pub final_panel: Option<ColorBy>,
    /// Panel of the top two principal components.
    pub pca_panel: bool,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            color_by: ColorBy::Coordinate(0),
            data_panel: None,
            final_panel: None,
            pca_panel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetSpec,
    /// Seed of the dataset generator; the optimizer carries its own.
    pub seed: u64,
    #[serde(default)]
    pub affinity: AffinityConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_snapshots")]
    pub snapshot_iterations: Vec<usize>,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticSpec>,
    #[serde(default)]
    pub plots: PlotSpec,
    pub output_dir: String,
}

fn default_snapshots() -> Vec<usize> {
    DEFAULT_SNAPSHOTS.to_vec()
}

impl ExperimentConfig {
    /// Sets both the dataset and the initialization seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.optimizer.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.affinity.validate()?;
        self.optimizer.validate()?;
        let total = self.optimizer.total_iterations;
        if self.snapshot_iterations.windows(2).any(|w| w[0] >= w[1]) {
            bail!("snapshot iterations must be strictly increasing");
        }
        if let Some(&last) = self.snapshot_iterations.last() {
            if last > total {
                bail!("snapshot {last} exceeds total_iterations {total}");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(self)?.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
