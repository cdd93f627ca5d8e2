//! Acceptance criteria. Each test prints one `criterion N [PASS|FAIL]` line
//! to stderr (uncaptured) and then asserts.

use std::io::Write;
use std::path::Path;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tsne_forensics::experiments::{preset, NAMES};
use tsne_forensics::pipeline;
use tsne_forensics_core::affinity::{
    affinities, conditional_rows, uniformity_statistic, AffinityConfig, Bandwidth,
};
use tsne_forensics_core::datasets::pca::Pca;
use tsne_forensics_core::datasets::{
    doubled_frame, equidistant_simplex, sample_sphere, sample_split_sphere, simplex_clusters,
    PointCloud, DEFAULT_SPLIT_EXPONENT,
};
use tsne_forensics_core::diagnostics::{
    block_stats, cap_measure_bound, enclosing_ball, grid_collision_stats, p0_star, BlockPartition,
};
use tsne_forensics_core::matrix::{distance, pairs, squared_distance, Matrix};
use tsne_forensics_core::optimizer::{kl_gradient, low_dim_affinities, objective, run};
use tsne_forensics_core::{OptimizerConfig, PairDistribution};

/// Criteria run one at a time so each runtime budget measures only its own work.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(criterion: u32, title: &str, pass: bool, detail: &str, elapsed: Duration) {
    let line = format!(
        "criterion {criterion:>2} [{}] {title}: {detail} ({:.1} s)\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn objective_fd(p: &PairDistribution, y: &Matrix, h: f64) -> Matrix {
    let mut g = Matrix::zeros(y.rows(), y.cols());
    for k in 0..y.as_slice().len() {
        let (mut a, mut b) = (y.clone(), y.clone());
        a.as_mut_slice()[k] += h;
        b.as_mut_slice()[k] -= h;
        g.as_mut_slice()[k] = (objective(p, &a).unwrap() - objective(p, &b).unwrap()) / (2.0 * h);
    }
    g
}

#[test]
fn criterion_01_gradient_correctness() {
    let _serial = serial();
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(3..=20);
        let raw: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.random::<f64>() + 1e-3)
            .collect();
        let total: f64 = raw.iter().sum();
        let p = PairDistribution::new(n, raw.iter().map(|v| v / total).collect()).unwrap();
        let y = Matrix::from_vec(
            n,
            2,
            (0..2 * n)
                .map(|_| 4.0 * rng.random::<f64>() - 2.0)
                .collect(),
        )
        .unwrap();
        let g = kl_gradient(&p, &y).unwrap();
        let fd = objective_fd(&p, &y, 1e-5);
        let diff: f64 = g
            .as_slice()
            .iter()
            .zip(fd.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let norm: f64 = fd.as_slice().iter().map(|v| v * v).sum();
        worst = worst.max((diff / norm).sqrt());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-5 && within(elapsed, 5);
    verdict(
        1,
        "gradient vs central differences",
        pass,
        &format!("worst relative error {worst:.2e} (limit 1e-5)"),
        elapsed,
    );
}

fn rows_and_total_error(cloud: &PointCloud, config: &AffinityConfig) -> f64 {
    let a = affinities(&cloud.points, config).unwrap();
    let rows = conditional_rows(&cloud.points, &a.bandwidths.bandwidths).unwrap();
    let row_err = rows
        .iter()
        .map(|r| (r.probs.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    row_err.max((a.p.total() - 1.0).abs())
}

#[test]
fn criterion_02_affinity_invariants() {
    let _serial = serial();
    let start = Instant::now();
    let clouds = [
        sample_sphere(1000, 10, 0).unwrap(),
        sample_split_sphere(1000, 20, 0, DEFAULT_SPLIT_EXPONENT).unwrap(),
        simplex_clusters(10, 100, 0.2, 0).unwrap(),
        doubled_frame(50).unwrap(),
        equidistant_simplex(100).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for cloud in &clouds {
        for config in [
            AffinityConfig::perplexity(30.0),
            AffinityConfig::fixed_sigma(1.0),
        ] {
            worst = worst.max(rows_and_total_error(cloud, &config));
        }
    }
    let simplex = equidistant_simplex(25).unwrap();
    let uniform_exact = [
        AffinityConfig::perplexity(5.0),
        AffinityConfig::fixed_sigma(0.7),
    ]
    .iter()
    .all(|c| uniformity_statistic(&affinities(&simplex.points, c).unwrap().p) == 0.0);
    let sphere = sample_sphere(20, 5, 3).unwrap();
    let mut infinite_uniform = true;
    for perp in [19.0, 25.0] {
        let a = affinities(&sphere.points, &AffinityConfig::perplexity(perp)).unwrap();
        infinite_uniform &= a
            .bandwidths
            .bandwidths
            .iter()
            .all(|b| *b == Bandwidth::Infinite);
        let rows = conditional_rows(&sphere.points, &a.bandwidths.bandwidths).unwrap();
        infinite_uniform &= rows
            .iter()
            .all(|r| r.probs.iter().all(|&p| (p - 1.0 / 19.0).abs() <= 1e-15));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && uniform_exact && infinite_uniform && within(elapsed, 10);
    verdict(
        2,
        "affinity invariants",
        pass,
        &format!(
            "max normalization error {worst:.1e}, equidistant statistic exactly 0: {uniform_exact}, p >= n-1 uniform: {infinite_uniform}"
        ),
        elapsed,
    );
}

#[test]
fn criterion_03_perplexity_calibration() {
    let _serial = serial();
    let start = Instant::now();
    let cloud = simplex_clusters(10, 100, 0.2, 0).unwrap();
    let a = affinities(&cloud.points, &AffinityConfig::perplexity(30.0)).unwrap();
    let worst = a
        .bandwidths
        .achieved_perplexities
        .iter()
        .map(|p| (p - 30.0).abs() / 30.0)
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = worst <= 1e-3 && within(elapsed, 10);
    verdict(
        3,
        "perplexity calibration",
        pass,
        &format!("worst relative deviation {worst:.2e} (limit 1e-3)"),
        elapsed,
    );
}

#[test]
fn criterion_04_equidistant_collapse() {
    let _serial = serial();
    let start = Instant::now();
    let cloud = equidistant_simplex(10).unwrap();
    let p = affinities(&cloud.points, &AffinityConfig::default())
        .unwrap()
        .p;
    let (mut worst_ratio, mut worst_obj): (f64, f64) = (0.0, 0.0);
    for seed in 0..5 {
        let config = OptimizerConfig::default().with_seed(seed);
        let out = run(&p, &config, &[0]).unwrap();
        let initial = enclosing_ball(&out.snapshots[0].y).unwrap().radius;
        let last = enclosing_ball(&out.state.y).unwrap().radius;
        worst_ratio = worst_ratio.max(last / initial);
        worst_obj = worst_obj.max(*out.objective_trace.last().unwrap());
    }
    let coincident = objective(&p, &Matrix::zeros(10, 2)).unwrap().abs();
    let elapsed = start.elapsed();
    let pass =
        worst_ratio <= 0.05 && worst_obj <= 1e-3 && coincident <= 1e-12 && within(elapsed, 30);
    verdict(
        4,
        "equidistant collapse",
        pass,
        &format!(
            "worst final/initial radius {worst_ratio:.2e} (limit 0.05), worst objective {worst_obj:.2e} (limit 1e-3), D at coincident Y {coincident:.1e}"
        ),
        elapsed,
    );
}

#[test]
fn criterion_05_sphere_concentration() {
    let _serial = serial();
    let start = Instant::now();
    let stat = |d: usize, seed: u64| {
        let cloud = sample_sphere(500, d, seed).unwrap();
        uniformity_statistic(
            &affinities(&cloud.points, &AffinityConfig::fixed_sigma(1.0))
                .unwrap()
                .p,
        )
    };
    let mut max_stat: f64 = 0.0;
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let high = stat(10_000, seed);
        let low = stat(2_500, seed);
        max_stat = max_stat.max(high);
        ratios.push(low / high);
    }
    let elapsed = start.elapsed();
    let ratios_ok = ratios.iter().all(|r| (1.4..=2.8).contains(r));
    let pass = max_stat <= 0.2 && ratios_ok && within(elapsed, 60);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    verdict(
        5,
        "sphere affinities near uniform",
        pass,
        &format!("max statistic at d=10000 {max_stat:.4} (limit 0.2), d=2500/d=10000 ratios [{}] (range 1.4..2.8)", shown.join(", ")),
        elapsed,
    );
}

#[test]
fn criterion_06_sphere_collapse_vs_control() {
    let _serial = serial();
    let start = Instant::now();
    let affinity = AffinityConfig::fixed_sigma(1.0);
    let mut wins = 0;
    let mut chain = true;
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let config = OptimizerConfig::default().with_seed(seed);
        let mut radius = [0.0; 2];
        for (k, d) in [10_000usize, 3].into_iter().enumerate() {
            let cloud = sample_sphere(500, d, seed).unwrap();
            let p = affinities(&cloud.points, &affinity).unwrap().p;
            let u = PairDistribution::uniform(500).unwrap();
            chain &= p.kl_divergence(&u).unwrap() <= p.chi_squared(&u).unwrap();
            let out = run(&p, &config, &[config.exaggeration_iterations]).unwrap();
            radius[k] = enclosing_ball(&out.snapshots[0].y).unwrap().radius;
        }
        let ratio = radius[0] / radius[1];
        ratios.push(format!("{:.2e}/{:.2e}", radius[0], radius[1]));
        wins += usize::from(ratio <= 0.5);
    }
    let elapsed = start.elapsed();
    let pass = wins >= 4 && chain && within(elapsed, 300);
    verdict(
        6,
        "sphere collapse vs d=3 control",
        pass,
        &format!(
            "end-of-exaggeration radii d=10000/d=3 [{}], {wins}/5 with ratio <= 0.5 (need 4; 0/0 counts as no), D(P||U) <= chi2(P||U) on all: {chain}",
            ratios.join(", ")
        ),
        elapsed,
    );
}

#[test]
fn criterion_07_doubled_frame_bounded_away() {
    let _serial = serial();
    let start = Instant::now();
    let cloud = doubled_frame(50).unwrap();
    let p = affinities(&cloud.points, &AffinityConfig::fixed_sigma(1.0))
        .unwrap()
        .p;
    let partition = BlockPartition::from_labels(cloud.labels.as_ref().unwrap());
    let mut min_kl = f64::INFINITY;
    let mut chain = true;
    for seed in 0..5 {
        let out = run(&p, &OptimizerConfig::default().with_seed(seed), &[]).unwrap();
        let (q, _) = low_dim_affinities(&out.state.y).unwrap();
        let stats = block_stats(&p, &q, &partition, 1.0).unwrap();
        chain &= stats.pinsker_lower_bound <= stats.block_kl && stats.block_kl <= stats.full_kl;
        min_kl = min_kl.min(p.kl_divergence(&q).unwrap());
    }
    let p0 = p0_star(1.0);
    let elapsed = start.elapsed();
    let pass = min_kl >= 0.01 && chain && (p0 - 1.635149).abs() <= 1e-6 && within(elapsed, 60);
    verdict(
        7,
        "doubled frame objective bounded away from zero",
        pass,
        &format!("min optimized D(P||Q) {min_kl:.4} (limit 0.01), block chain holds: {chain}, p0* = {p0:.7}"),
        elapsed,
    );
}

#[test]
fn criterion_08_volume_statistics() {
    let _serial = serial();
    let start = Instant::now();
    // pigeonhole on embeddings produced by the optimizer
    let mut pigeonhole = true;
    for (seed, d) in [(0u64, 3usize), (1, 20)] {
        let cloud = sample_sphere(300, d, seed).unwrap();
        let p = affinities(&cloud.points, &AffinityConfig::default())
            .unwrap()
            .p;
        let out = run(&p, &OptimizerConfig::default().with_seed(seed), &[10, 500]).unwrap();
        for y in out.snapshots.iter().map(|s| &s.y).chain([&out.state.y]) {
            for g in [0.5, 1.0, 5.0] {
                let s = grid_collision_stats(&cloud.points, y, g, 0.2).unwrap();
                pigeonhole &= s.pigeonhole_holds && s.fraction_alone <= s.cell_count as f64 / 300.0;
            }
        }
    }
    let mut distances_ok = true;
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for seed in 0..5 {
        let cloud = sample_sphere(1000, 30, seed).unwrap();
        for (i, j) in pairs(1000) {
            let dist = distance(cloud.points.row(i), cloud.points.row(j));
            dmin = dmin.min(dist);
            dmax = dmax.max(dist);
        }
    }
    distances_ok &= dmin >= 0.2 && dmax <= 2.0;
    let bound = cap_measure_bound(0.2, 30).unwrap();
    let threshold = 1.0 - 0.2 * 0.2 / 2.0;
    let mut hits = 0usize;
    for chunk in 0..10 {
        let cloud = sample_sphere(100_000, 30, 10_000 + chunk).unwrap();
        hits += cloud
            .points
            .iter_rows()
            .filter(|x| x[0] >= threshold)
            .count();
    }
    let estimate = hits as f64 / 1e6;
    let elapsed = start.elapsed();
    let pass = pigeonhole && distances_ok && bound > estimate && within(elapsed, 60);
    verdict(
        8,
        "volume argument statistics",
        pass,
        &format!(
            "pigeonhole holds: {pigeonhole}, d=30 distances in [{dmin:.3}, {dmax:.3}] (need [0.2, 2]), cap bound {bound:.2e} vs Monte Carlo {estimate:.2e}"
        ),
        elapsed,
    );
}

fn brute_force_radius(points: &Matrix) -> f64 {
    let n = points.rows();
    let covers = |c: [f64; 2], r: f64| {
        points
            .iter_rows()
            .all(|p| distance(p, &c) <= r + 1e-12 * (1.0 + r))
    };
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points.row(i), points.row(j));
            let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let r = distance(a, &c);
            if r < best && covers(c, r) {
                best = r;
            }
            for k in j + 1..n {
                let e = points.row(k);
                let d = 2.0 * (a[0] * (b[1] - e[1]) + b[0] * (e[1] - a[1]) + e[0] * (a[1] - b[1]));
                if d.abs() < 1e-14 {
                    continue;
                }
                let (sa, sb, se) = (
                    a[0] * a[0] + a[1] * a[1],
                    b[0] * b[0] + b[1] * b[1],
                    e[0] * e[0] + e[1] * e[1],
                );
                let ux = (sa * (b[1] - e[1]) + sb * (e[1] - a[1]) + se * (a[1] - b[1])) / d;
                let uy = (sa * (e[0] - b[0]) + sb * (a[0] - e[0]) + se * (b[0] - a[0])) / d;
                let r = distance(a, &[ux, uy]);
                if r < best && covers([ux, uy], r) {
                    best = r;
                }
            }
        }
    }
    best
}

#[test]
fn criterion_09_enclosing_ball() {
    let _serial = serial();
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let y = Matrix::from_vec(
            50,
            2,
            (0..100).map(|_| 10.0 * rng.random::<f64>() - 5.0).collect(),
        )
        .unwrap();
        worst = worst.max((enclosing_ball(&y).unwrap().radius - brute_force_radius(&y)).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && within(elapsed, 30);
    verdict(
        9,
        "enclosing ball vs brute force",
        pass,
        &format!("worst radius difference {worst:.1e} (limit 1e-9)"),
        elapsed,
    );
}

#[test]
fn criterion_10_figure_one() {
    let _serial = serial();
    let start = Instant::now();
    let (k, sigma) = (10, 0.2);
    let cloud = simplex_clusters(k, 100, sigma, 0).unwrap();
    let p = affinities(&cloud.points, &AffinityConfig::perplexity(30.0))
        .unwrap()
        .p;
    let out = run(&p, &OptimizerConfig::default(), &[]).unwrap();
    let labels = cloud.labels.as_ref().unwrap();
    let (mut within_sum, mut within_n, mut between_sum, mut between_n) = (0.0, 0usize, 0.0, 0usize);
    for (i, j) in pairs(cloud.n()) {
        let d = distance(out.state.y.row(i), out.state.y.row(j));
        if labels[i] == labels[j] {
            within_sum += d;
            within_n += 1;
        } else {
            between_sum += d;
            between_n += 1;
        }
    }
    let (w, b) = (within_sum / within_n as f64, between_sum / between_n as f64);
    let fraction = Pca::fit(&cloud.points)
        .unwrap()
        .captured_variance_fraction(2);
    // analytic mixture covariance: eigenvalue 1/k + σ² with multiplicity k − 1, and σ²
    let top = 1.0 / k as f64 + sigma * sigma;
    let analytic = 2.0 * top / ((k - 1) as f64 * top + sigma * sigma);
    let elapsed = start.elapsed();
    let pass = w < 0.5 * b && fraction < 0.35 && analytic < 0.35 && within(elapsed, 120);
    verdict(
        10,
        "simplex clusters: t-SNE separates, PCA does not",
        pass,
        &format!(
            "within/between mean distance {:.3} (limit 0.5), PCA top-2 fraction {fraction:.3} (analytic {analytic:.3}, limit 0.35)",
            w / b
        ),
        elapsed,
    );
}

/// Lloyd's 2-means from the two mutually farthest-first seeds.
fn two_means(y: &Matrix) -> Vec<usize> {
    let n = y.rows();
    let far = |from: &[f64]| {
        (0..n)
            .max_by(|&a, &b| {
                squared_distance(y.row(a), from).total_cmp(&squared_distance(y.row(b), from))
            })
            .unwrap()
    };
    let a = far(y.row(0));
    let b = far(y.row(a));
    let mut centers = [y.row(a).to_vec(), y.row(b).to_vec()];
    let mut assign = vec![0usize; n];
    for _ in 0..100 {
        let next: Vec<usize> = (0..n)
            .map(|i| {
                usize::from(
                    squared_distance(y.row(i), &centers[1])
                        < squared_distance(y.row(i), &centers[0]),
                )
            })
            .collect();
        let changed = next != assign;
        assign = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            for (axis, v) in center.iter_mut().enumerate() {
                *v = members.iter().map(|&i| y.get(i, axis)).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

#[test]
fn criterion_11_split_sphere() {
    let _serial = serial();
    let start = Instant::now();
    let mut wins = 0;
    let mut agreements = Vec::new();
    for seed in 0..5 {
        let cloud = sample_split_sphere(1000, 20, seed, DEFAULT_SPLIT_EXPONENT).unwrap();
        let p = affinities(&cloud.points, &AffinityConfig::default())
            .unwrap()
            .p;
        let out = run(&p, &OptimizerConfig::default().with_seed(seed), &[]).unwrap();
        let assign = two_means(&out.state.y);
        let labels = cloud.labels.as_ref().unwrap();
        let same = assign
            .iter()
            .zip(labels)
            .filter(|(&a, &l)| a as i64 == l)
            .count() as f64
            / 1000.0;
        let agreement = same.max(1.0 - same);
        agreements.push(format!("{agreement:.3}"));
        wins += usize::from(agreement >= 0.9);
    }
    let elapsed = start.elapsed();
    let pass = wins >= 4 && within(elapsed, 120);
    verdict(
        11,
        "split sphere recovered by 2-means",
        pass,
        &format!(
            "agreement per seed [{}], {wins}/5 >= 0.9 (need 4)",
            agreements.join(", ")
        ),
        elapsed,
    );
}

fn run_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if matches!(
                path.extension().and_then(|e| e.to_str()),
                Some("csv" | "svg")
            ) {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_12_determinism() {
    let _serial = serial();
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut compared = 0;
    for name in NAMES {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{name}-{rep}"));
            let config = preset(name, 11, false, &dir.display().to_string())
                .unwrap()
                .config;
            pipeline::execute(&config, &dir).unwrap();
            outputs.push(run_outputs(&dir));
        }
        compared += outputs[0].len();
        identical &= !outputs[0].is_empty() && outputs[0] == outputs[1];
    }
    let elapsed = start.elapsed();
    verdict(
        12,
        "determinism of experiment outputs",
        identical,
        &format!(
            "{} experiments run twice, {compared} CSV/SVG files byte-identical: {identical}",
            NAMES.len()
        ),
        elapsed,
    );
}
