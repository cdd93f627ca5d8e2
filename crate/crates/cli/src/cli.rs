//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tsne_forensics_core::diagnostics::DEFAULT_FAR_THRESHOLD;
use tsne_forensics_core::{AffinityConfig, OptimizerConfig, Pca, PointCloud, StepSize};

use crate::config::{DatasetSpec, DiagnosticSpec, ExperimentConfig, PlotSpec, DEFAULT_SNAPSHOTS};
use crate::diagnose::{self, DiagnosticInput};
use crate::experiments;
use crate::io;
use crate::pipeline;
use crate::report::ReportDocument;
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const THREADS_ENV: &str = "TSNE_FORENSICS_THREADS";

/// Bad or missing arguments detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(
    name = "tsne-forensics",
    version,
    about = "Exact t-SNE runs and collapse diagnostics"
)]
pub struct Cli {
    /// Seed for dataset generation and initialization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for outputs.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Experiment configuration JSON.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic point cloud as CSV plus a metadata sidecar.
    Generate(GenerateArgs),
    /// Run affinities and the optimizer on a point CSV.
    Embed(EmbedArgs),
    /// Compute diagnostics for a point CSV and an index-aligned embedding.
    Diagnose(DiagnoseArgs),
    /// Run a named, preconfigured experiment.
    Experiment(ExperimentArgs),
    /// Render a 2-column CSV as an SVG scatter plot.
    Plot(PlotArgs),
    /// Project a point CSV onto its top principal components.
    Pca(PcaArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Generator {
    Sphere,
    SplitSphere,
    SimplexClusters,
    DoubledFrame,
    EquidistantSimplex,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub generator: Generator,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of simplex clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub per_cluster: Option<usize>,
    /// Cluster standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub n_half: Option<usize>,
    #[arg(long, default_value_t = tsne_forensics_core::datasets::DEFAULT_SPLIT_EXPONENT)]
    pub threshold_exponent: f64,
    /// Output CSV; defaults to `<out-dir>/<generator>.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Point CSV; optional when `--config` names a dataset.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Fixed input bandwidth; skips the perplexity search.
    #[arg(long, conflicts_with = "perplexity")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub exaggeration_iterations: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// A number, or `auto`.
    #[arg(long)]
    pub step_size: Option<String>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    #[arg(long)]
    pub output_dim: Option<usize>,
    /// Comma-separated snapshot iterations.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    CoveringBall,
    Grid,
    Blocks,
    TheoremBall,
    Uniformity,
    Enclosing,
    Objective,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long = "check", required = true)]
    pub checks: Vec<Check>,
    #[arg(long, default_value_t = 0.9)]
    pub fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    #[arg(long, default_value_t = DEFAULT_FAR_THRESHOLD)]
    pub far_threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    /// Fixed input bandwidth; required by `blocks`.
    #[arg(long, conflicts_with = "perplexity")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    /// Report path; defaults to `<out-dir>/report.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// One of the named experiments; optional with `--config`.
    pub name: Option<String>,
    /// Paper-scale dimensions instead of the downscaled default.
    #[arg(long)]
    pub full: bool,
    /// Print the experiment names and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `label` or `c<k>`, a column of the input or of `--color-file`.
    #[arg(long)]
    pub color_by: Option<String>,
    #[arg(long)]
    pub color_file: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    /// SVG path; defaults to `<out-dir>/<input stem>.svg`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// CSV path; defaults to `<out-dir>/<input stem>.pca.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return EXIT_USAGE;
    }
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            usage(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(cli, a),
        Command::Embed(a) => embed(cli, a),
        Command::Diagnose(a) => diagnose_cmd(cli, a),
        Command::Experiment(a) => experiment(cli, a),
        Command::Plot(a) => plot(cli, a),
        Command::Pca(a) => pca(cli, a),
    }
}

fn out_dir(cli: &Cli, fallback: &str) -> PathBuf {
    cli.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text)
        .map_err(|e| usage(format!("invalid config {}: {e:#}", path.display())))
}

fn need<T>(value: Option<T>, flag: &str, generator: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("{generator} needs --{flag}")))
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let name = a
        .generator
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let spec = match a.generator {
        Generator::Sphere => DatasetSpec::Sphere {
            n: need(a.n, "n", &name)?,
            d: need(a.d, "d", &name)?,
        },
        Generator::SplitSphere => DatasetSpec::SplitSphere {
            n: need(a.n, "n", &name)?,
            d: need(a.d, "d", &name)?,
            threshold_exponent: a.threshold_exponent,
        },
        Generator::SimplexClusters => DatasetSpec::SimplexClusters {
            k: a.k.unwrap_or(10),
            per_cluster: a.per_cluster.unwrap_or(100),
            sigma: a.sigma.unwrap_or(0.2),
        },
        Generator::DoubledFrame => DatasetSpec::DoubledFrame {
            n_half: need(a.n_half, "n-half", &name)?,
        },
        Generator::EquidistantSimplex => DatasetSpec::EquidistantSimplex {
            n: need(a.n, "n", &name)?,
        },
    };
    let cloud = spec.load(cli.seed.unwrap_or(0))?;
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| out_dir(cli, ".").join(format!("{name}.csv")));
    write_cloud(&path, &cloud)?;
    println!("{}", path.display());
    Ok(())
}

fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    io::write_points(path, &cloud.points, cloud.labels.as_deref())?;
    let sidecar = io::Sidecar {
        generator: cloud.metadata.clone(),
        n: cloud.n(),
        d: cloud.dim(),
        has_labels: cloud.labels.is_some(),
    };
    io::write_json(&io::sidecar_path(path), &sidecar)
}

fn parse_step_size(text: &str) -> Result<StepSize> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(StepSize::Auto);
    }
    text.parse::<f64>().map(StepSize::Fixed).map_err(|_| {
        usage(format!(
            "--step-size must be a number or auto, got {text:?}"
        ))
    })
}

fn embed(cli: &Cli, a: &EmbedArgs) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => {
            let input = a
                .input
                .as_ref()
                .ok_or_else(|| usage("embed needs --input or --config"))?;
            ExperimentConfig {
                name: "embed".into(),
                dataset: DatasetSpec::Csv {
                    path: input.display().to_string(),
                },
                seed: 0,
                affinity: AffinityConfig::default(),
                optimizer: OptimizerConfig::default(),
                snapshot_iterations: DEFAULT_SNAPSHOTS.to_vec(),
                diagnostics: Vec::new(),
                plots: PlotSpec::default(),
                output_dir: "embed".into(),
            }
        }
    };
    if let Some(input) = &a.input {
        config.dataset = DatasetSpec::Csv {
            path: input.display().to_string(),
        };
    }
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    if let Some(s) = a.sigma {
        config.affinity = AffinityConfig::fixed_sigma(s);
    }
    if let Some(p) = a.perplexity {
        config.affinity = AffinityConfig::perplexity(p);
    }
    let o = &mut config.optimizer;
    if let Some(v) = a.iterations {
        o.total_iterations = v;
    }
    if let Some(v) = a.exaggeration_iterations {
        o.exaggeration_iterations = v;
    }
    if let Some(v) = a.alpha {
        o.alpha = v;
    }
    if let Some(v) = &a.step_size {
        o.step_size = parse_step_size(v)?;
    }
    if let Some(v) = a.init_scale {
        o.init_scale = v;
    }
    if let Some(v) = a.output_dim {
        o.output_dim = v;
    }
    if let Some(s) = &a.snapshots {
        config.snapshot_iterations = s.clone();
    } else if cli.config.is_none() {
        let total = config.optimizer.total_iterations;
        config.snapshot_iterations.retain(|&t| t <= total);
    }
    config.validate().map_err(|e| usage(format!("{e:#}")))?;
    let dir = cli
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let manifest = pipeline::execute(&config, &dir)?;
    println!("{}", dir.join(pipeline::MANIFEST_FILE).display());
    if let Some(h) = manifest.step_size {
        eprintln!("step size {h}, {} snapshots", manifest.snapshots.len());
    }
    Ok(())
}

fn diagnose_cmd(cli: &Cli, a: &DiagnoseArgs) -> Result<()> {
    let x = io::read_points(&a.points)?;
    let y = io::read_points(&a.embedding)?;
    let mut checks = Vec::new();
    for &c in &a.checks {
        checks.push(match c {
            Check::CoveringBall => DiagnosticSpec::CoveringBall {
                fraction: a.fraction,
            },
            Check::Grid => DiagnosticSpec::Grid {
                g: a.g,
                far_threshold: a.far_threshold,
            },
            Check::Blocks => DiagnosticSpec::Blocks {
                sigma: a.sigma.ok_or_else(|| usage("blocks needs --sigma"))?,
            },
            Check::TheoremBall => DiagnosticSpec::TheoremBall { r: a.r },
            Check::Uniformity => DiagnosticSpec::Uniformity,
            Check::Enclosing => DiagnosticSpec::Enclosing,
            Check::Objective => DiagnosticSpec::Objective,
        });
    }
    let affinity = match (a.sigma, a.perplexity) {
        (Some(s), _) => AffinityConfig::fixed_sigma(s),
        (None, Some(p)) => AffinityConfig::perplexity(p),
        (None, None) => AffinityConfig::default(),
    };
    let input = DiagnosticInput {
        x: &x.points,
        labels: x.labels.as_deref(),
        y: &y.points,
        p: None,
        affinity: &affinity,
    };
    let report = diagnose::run(&input, &checks)?;
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| out_dir(cli, ".").join("report.json"));
    io::create_parent(&path)?;
    fs::write(&path, ReportDocument::from(&report).to_json()?)
        .with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn experiment(cli: &Cli, a: &ExperimentArgs) -> Result<()> {
    if a.list {
        for name in experiments::NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let root = out_dir(cli, "experiments");
    let config = match (&cli.config, &a.name) {
        (Some(path), _) => {
            let mut c = load_config(path)?;
            if let Some(seed) = cli.seed {
                c = c.with_seed(seed);
            }
            c
        }
        (None, Some(name)) => {
            let dir = root.join(name).display().to_string();
            let p = experiments::preset(name, cli.seed.unwrap_or(0), a.full, &dir)
                .map_err(|e| usage(format!("{e:#}")))?;
            if let Some(w) = &p.warning {
                eprintln!("warning: {w}");
            }
            p.config
        }
        (None, None) => return Err(usage("experiment needs a name or --config")),
    };
    let dir = match (&cli.config, &cli.out_dir) {
        (Some(_), Some(d)) => d.clone(),
        _ => PathBuf::from(&config.output_dir),
    };
    pipeline::execute(&config, &dir)?;
    println!("{}", dir.join(pipeline::MANIFEST_FILE).display());
    Ok(())
}

fn column(table: &io::Table, name: &str) -> Result<Vec<f64>> {
    if name == io::LABEL_COLUMN {
        let labels = table
            .labels
            .as_ref()
            .ok_or_else(|| usage("no label column to color by"))?;
        return Ok(labels.iter().map(|&v| v as f64).collect());
    }
    let k: usize = name
        .strip_prefix('c')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            usage(format!(
                "--color-by must be `label` or `c<k>`, got {name:?}"
            ))
        })?;
    if k >= table.points.cols() {
        return Err(usage(format!("column {name} does not exist")));
    }
    Ok(table.points.iter_rows().map(|r| r[k]).collect())
}

fn plot(cli: &Cli, a: &PlotArgs) -> Result<()> {
    let table = io::read_points(&a.input)?;
    let color = match (&a.color_file, &a.color_by) {
        (Some(file), by) => Some(column(
            &io::read_points(file)?,
            by.as_deref().unwrap_or("c0"),
        )?),
        (None, Some(by)) => Some(column(&table, by)?),
        (None, None) => None,
    };
    let text = svg::scatter(&table.points, color.as_deref(), a.title.as_deref())?;
    let stem = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| out_dir(cli, ".").join(format!("{stem}.svg")));
    io::create_parent(&path)?;
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

#[derive(serde::Serialize)]
struct PcaSummary {
    k: usize,
    captured_variance_fraction: f64,
    eigenvalues: Vec<f64>,
    mean: Vec<f64>,
}

fn pca(cli: &Cli, a: &PcaArgs) -> Result<()> {
    let table = io::read_points(&a.input)?;
    let fit = Pca::fit(&table.points)?;
    let projected = fit.project(&table.points, a.k)?;
    let stem = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "points".into());
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| out_dir(cli, ".").join(format!("{stem}.pca.csv")));
    io::write_points(&path, &projected, table.labels.as_deref())?;
    let summary = PcaSummary {
        k: a.k,
        captured_variance_fraction: fit.captured_variance_fraction(a.k),
        eigenvalues: fit.eigen.values.clone(),
        mean: fit.mean.clone(),
    };
    io::write_json(&io::sidecar_path(&path), &summary)?;
    println!("{}", path.display());
    eprintln!(
        "captured variance fraction {}",
        summary.captured_variance_fraction
    );
    Ok(())
}
