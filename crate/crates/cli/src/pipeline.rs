//! generate → affinities → optimize → diagnose → plot, written to one
//! run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tsne_forensics_core::affinity::affinities;
use tsne_forensics_core::optimizer::run as optimize;
use tsne_forensics_core::{BandwidthMode, Error as CoreError, Matrix, Pca, PointCloud};

use crate::config::{ColorBy, ExperimentConfig};
use crate::diagnose::{self, DiagnosticInput};
use crate::io;
use crate::report::ReportDocument;
use crate::svg;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub iteration: usize,
    pub csv: String,
    pub svg: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// 1-based count of the step that produced non-finite coordinates.
    pub iteration: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinitySummary {
    pub mode: String,
    pub rows: usize,
    pub converged_rows: usize,
    pub min_perplexity: f64,
    pub max_perplexity: f64,
}

/// Index of everything a run wrote. Paths are relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub config_path: String,
    pub data_path: String,
    pub data_metadata_path: String,
    pub snapshots: Vec<SnapshotEntry>,
    pub plots: Vec<String>,
    /// Other CSV outputs: the final embedding and, if plotted, the PCA projection.
    pub tables: Vec<String>,
    pub trace_path: Option<String>,
    pub report_path: Option<String>,
    pub step_size: Option<f64>,
    pub affinity: Option<AffinitySummary>,
    pub extras: BTreeMap<String, f64>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub failure: Option<Failure>,
}

impl RunManifest {
    /// All files the manifest points at.
    pub fn referenced_files(&self) -> Vec<&str> {
        let mut files = vec![
            self.config_path.as_str(),
            self.data_path.as_str(),
            self.data_metadata_path.as_str(),
        ];
        for s in &self.snapshots {
            files.push(&s.csv);
            files.extend(s.svg.as_deref());
        }
        files.extend(self.plots.iter().map(String::as_str));
        files.extend(self.tables.iter().map(String::as_str));
        files.extend(self.trace_path.as_deref());
        files.extend(self.report_path.as_deref());
        files
    }
}

fn color_values(cloud: &PointCloud, by: ColorBy) -> Result<Option<Vec<f64>>> {
    Ok(match by {
        ColorBy::None => None,
        ColorBy::Label => cloud
            .labels
            .as_ref()
            .map(|l| l.iter().map(|&v| v as f64).collect()),
        ColorBy::Coordinate(k) => {
            if k >= cloud.dim() {
                bail!(
                    "cannot color by coordinate {k} of {}-dimensional data",
                    cloud.dim()
                );
            }
            Some(cloud.points.iter_rows().map(|r| r[k]).collect())
        }
    })
}

fn color_tag(by: ColorBy) -> String {
    match by {
        ColorBy::None => "plain".into(),
        ColorBy::Label => "label".into(),
        ColorBy::Coordinate(k) => format!("c{k}"),
    }
}

fn first_two_coordinates(points: &Matrix) -> Result<Matrix> {
    let n = points.rows();
    let mut out = Matrix::zeros(n, 2);
    for i in 0..n {
        for c in 0..points.cols().min(2) {
            out.set(i, c, points.get(i, c));
        }
    }
    Ok(out)
}

struct Writer<'a> {
    dir: &'a Path,
}

impl Writer<'_> {
    fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    fn svg(
        &self,
        rel: &str,
        points: &Matrix,
        color: Option<&[f64]>,
        title: &str,
    ) -> Result<String> {
        let text = svg::scatter(points, color, Some(title))?;
        let path = self.path(rel);
        io::create_parent(&path)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(rel.into())
    }
}

/// Runs `config` into `dir`, which is created if needed. On optimizer
/// divergence the manifest records the failure and an error is returned.
pub fn execute(config: &ExperimentConfig, dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let w = Writer { dir };
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |timings: &mut BTreeMap<String, f64>, stage: &str| {
        timings.insert(stage.to_string(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };

    let config_path = "config.json";
    io::write_json(&w.path(config_path), config)?;

    let cloud = config.dataset.load(config.seed)?;
    let (data_path, meta_path) = ("data.csv", "data.meta.json");
    io::write_points(&w.path(data_path), &cloud.points, cloud.labels.as_deref())?;
    let sidecar = io::Sidecar {
        generator: cloud.metadata.clone(),
        n: cloud.n(),
        d: cloud.dim(),
        has_labels: cloud.labels.is_some(),
    };
    io::write_json(&w.path(meta_path), &sidecar)?;
    lap(&mut timings, "generate");

    let mut manifest = RunManifest {
        schema_version: crate::report::SCHEMA_VERSION,
        name: config.name.clone(),
        config_hash: config.hash()?,
        config_path: config_path.into(),
        data_path: data_path.into(),
        data_metadata_path: meta_path.into(),
        snapshots: Vec::new(),
        plots: Vec::new(),
        tables: Vec::new(),
        trace_path: None,
        report_path: None,
        step_size: None,
        affinity: None,
        extras: BTreeMap::new(),
        timings: BTreeMap::new(),
        failure: None,
    };

    let aff = affinities(&cloud.points, &config.affinity)?;
    let achieved = &aff.bandwidths.achieved_perplexities;
    manifest.affinity = Some(AffinitySummary {
        mode: match config.affinity.mode {
            BandwidthMode::FixedSigma(s) => format!("fixed_sigma({s})"),
            BandwidthMode::Perplexity(p) => format!("perplexity({p})"),
        },
        rows: achieved.len(),
        converged_rows: aff.bandwidths.converged.iter().filter(|&&c| c).count(),
        min_perplexity: achieved.iter().copied().fold(f64::INFINITY, f64::min),
        max_perplexity: achieved.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    lap(&mut timings, "affinities");

    let out = match optimize(&aff.p, &config.optimizer, &config.snapshot_iterations) {
        Ok(out) => out,
        Err(e) => {
            let iteration = match e {
                CoreError::Diverged { iteration } => Some(iteration),
                _ => None,
            };
            manifest.failure = Some(Failure {
                iteration,
                message: e.to_string(),
            });
            lap(&mut timings, "optimize");
            manifest.timings = timings;
            io::write_json(&w.path(MANIFEST_FILE), &manifest)?;
            return Err(anyhow::Error::new(e).context(format!("run {} failed", config.name)));
        }
    };
    manifest.step_size = Some(out.step_size);
    lap(&mut timings, "optimize");

    let colors = color_values(&cloud, config.plots.color_by)?;
    for snap in &out.snapshots {
        let csv = format!("snapshots/iter_{:04}.csv", snap.iteration);
        io::write_points(&w.path(&csv), &snap.y, cloud.labels.as_deref())?;
        let svg = if snap.y.cols() == 2 {
            let title = format!("{}: iteration {}", config.name, snap.iteration);
            Some(w.svg(
                &format!("plots/iter_{:04}.svg", snap.iteration),
                &snap.y,
                colors.as_deref(),
                &title,
            )?)
        } else {
            None
        };
        manifest.snapshots.push(SnapshotEntry {
            iteration: snap.iteration,
            csv,
            svg,
        });
    }
    let final_csv = "final.csv";
    io::write_points(&w.path(final_csv), &out.state.y, cloud.labels.as_deref())?;
    manifest.tables.push(final_csv.into());

    if let Some(by) = config.plots.data_panel {
        let c = color_values(&cloud, by)?;
        let title = format!("{}: first two coordinates", config.name);
        let rel = format!("plots/data_{}.svg", color_tag(by));
        manifest.plots.push(w.svg(
            &rel,
            &first_two_coordinates(&cloud.points)?,
            c.as_deref(),
            &title,
        )?);
    }
    if let (Some(by), 2) = (config.plots.final_panel, out.state.y.cols()) {
        let c = color_values(&cloud, by)?;
        let title = format!("{}: final output", config.name);
        let rel = format!("plots/final_{}.svg", color_tag(by));
        manifest
            .plots
            .push(w.svg(&rel, &out.state.y, c.as_deref(), &title)?);
    }
    if config.plots.pca_panel {
        let pca = Pca::fit(&cloud.points)?;
        let k = cloud.dim().min(2);
        let projected = first_two_coordinates(&pca.project(&cloud.points, k)?)?;
        manifest.extras.insert(
            "pca.captured_variance_fraction".into(),
            pca.captured_variance_fraction(k),
        );
        io::write_points(&w.path("pca.csv"), &projected, cloud.labels.as_deref())?;
        manifest.tables.push("pca.csv".into());
        let title = format!("{}: first two principal components", config.name);
        manifest
            .plots
            .push(w.svg("plots/pca.svg", &projected, colors.as_deref(), &title)?);
    }
    lap(&mut timings, "plot");

    let trace_path = "trace.csv";
    fs::write(w.path(trace_path), io::trace_to_csv(&out.objective_trace)?)?;
    manifest.trace_path = Some(trace_path.into());
    if let Some(&last) = out.objective_trace.last() {
        manifest.extras.insert("objective.final".into(), last);
    }

    let input = DiagnosticInput {
        x: &cloud.points,
        labels: cloud.labels.as_deref(),
        y: &out.state.y,
        p: Some(&aff.p),
        affinity: &config.affinity,
    };
    let report = diagnose::run(&input, &config.diagnostics)?;
    let report_path = "report.json";
    fs::write(
        w.path(report_path),
        ReportDocument::from(&report).to_json()?,
    )?;
    manifest.report_path = Some(report_path.into());
    lap(&mut timings, "diagnose");

    manifest.timings = timings;
    io::write_json(&w.path(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
