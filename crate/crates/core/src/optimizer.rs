//! Output-space side of t-SNE.
//!
//! `Q` comes from the Cauchy kernel `w_ij = (1 + ‖y_i − y_j‖²)⁻¹` normalized
//! over unordered pairs, `q_ij = w_ij / Z`. With `P` and `Q` both normalized
//! over unordered pairs, the exact gradient of `D(P‖Q)` is
//!
//! ```text
//! ∂D/∂y_i = 2 Σ_{j≠i} (p_ij − q_ij) w_ij (y_i − y_j)
//!         = 2 Σ_{j≠i} (p_ij q_ij Z − q_ij² Z) (y_i − y_j)
//! ```
//!
//! i.e. twice the difference of the attractive and repulsive forces. Early
//! exaggeration multiplies the attractive term by `α`.

use alloc::vec;
use alloc::vec::Vec;

use crate::divergences::PairDistribution;
use crate::error::{Error, Result};
use crate::matrix::{pair_count, pair_index, squared_distance, Matrix};
use crate::rng::{self, Purpose};

pub const DEFAULT_TOTAL_ITERATIONS: usize = 1000;
pub const DEFAULT_EXAGGERATION_ITERATIONS: usize = 500;
pub const DEFAULT_ALPHA: f64 = 12.0;
pub const MAX_STEP_SIZE: f64 = 200.0;
pub const DEFAULT_INIT_SCALE: f64 = 1e-4;

/// Cauchy kernel values over pairs plus their sum `Z`.
#[derive(Debug, Clone)]
struct Kernel {
    w: Vec<f64>,
    z: f64,
}

impl Kernel {
    fn new(y: &Matrix) -> Self {
        let n = y.rows();
        let rows = crate::par::map_indices(n, |i| {
            let yi = y.row(i);
            (i + 1..n)
                .map(|j| 1.0 / (1.0 + squared_distance(yi, y.row(j))))
                .collect::<Vec<_>>()
        });
        let mut w = Vec::with_capacity(pair_count(n));
        for r in rows {
            w.extend(r);
        }
        let z = w.iter().sum();
        Self { w, z }
    }

    /// `D(P‖Q)`; every `q_ij` is positive so the sum is always finite.
    fn objective(&self, p: &PairDistribution) -> f64 {
        let mut d = 0.0;
        for (&pk, &wk) in p.masses().iter().zip(&self.w) {
            if pk > 0.0 {
                d += pk * libm::log(pk * self.z / wk);
            }
        }
        d
    }

    /// `2 Σ_j (α p_ij − q_ij) w_ij (y_i − y_j)` for every `i`.
    fn direction(&self, p: &PairDistribution, y: &Matrix, alpha: f64) -> Matrix {
        let (n, s) = (y.rows(), y.cols());
        let inv_z = 1.0 / self.z;
        let coeff: Vec<f64> = p
            .masses()
            .iter()
            .zip(&self.w)
            .map(|(&pk, &w)| 2.0 * (alpha * pk - w * inv_z) * w)
            .collect();
        let ys = y.as_slice();
        let rows = crate::par::map_indices(n, |i| {
            let yi = &ys[i * s..(i + 1) * s];
            let mut acc = vec![0.0; s];
            // Pairs (j, i) with j < i sit at stride n − j − 2 apart.
            let mut k = i.wrapping_sub(1);
            for j in 0..i {
                add_scaled_difference(&mut acc, coeff[k], yi, &ys[j * s..(j + 1) * s]);
                k = k.wrapping_add(n - j - 2);
            }
            if i + 1 < n {
                let base = pair_index(n, i, i + 1);
                for (j, &c) in (i + 1..n).zip(&coeff[base..base + (n - i - 1)]) {
                    add_scaled_difference(&mut acc, c, yi, &ys[j * s..(j + 1) * s]);
                }
            }
            acc
        });
        let mut out = Matrix::zeros(n, s);
        for (i, r) in rows.into_iter().enumerate() {
            out.row_mut(i).copy_from_slice(&r);
        }
        out
    }
}

#[inline]
fn add_scaled_difference(acc: &mut [f64], c: f64, a: &[f64], b: &[f64]) {
    for ((t, &u), &v) in acc.iter_mut().zip(a).zip(b) {
        *t += c * (u - v);
    }
}

fn check_sizes(p: &PairDistribution, y: &Matrix) -> Result<()> {
    if p.n() != y.rows() {
        return Err(Error::SizeMismatch {
            expected: p.n(),
            found: y.rows(),
        });
    }
    Ok(())
}

/// `Q(Y)` and its normalizer `Z = Σ_{pairs} (1 + ‖y_k − y_l‖²)⁻¹`.
pub fn low_dim_affinities(y: &Matrix) -> Result<(PairDistribution, f64)> {
    if y.rows() < 2 {
        return Err(Error::TooFewPoints {
            min: 2,
            got: y.rows(),
        });
    }
    let kernel = Kernel::new(y);
    let z = kernel.z;
    let q = kernel.w.into_iter().map(|w| w / z).collect();
    Ok((PairDistribution::from_parts(y.rows(), q), z))
}

/// The t-SNE objective `D(P‖Q(Y))`.
pub fn objective(p: &PairDistribution, y: &Matrix) -> Result<f64> {
    check_sizes(p, y)?;
    Ok(Kernel::new(y).objective(p))
}

/// Exact gradient of [`objective`] with respect to every `y_i`.
pub fn kl_gradient(p: &PairDistribution, y: &Matrix) -> Result<Matrix> {
    exaggerated_direction(p, y, 1.0)
}

/// The update direction used during early exaggeration,
/// `2 Σ_j (α p_ij q_ij Z − q_ij² Z)(y_i − y_j)`. Identical, bit for bit, to
/// [`kl_gradient`] when `α = 1`.
pub fn exaggerated_direction(p: &PairDistribution, y: &Matrix, alpha: f64) -> Result<Matrix> {
    check_sizes(p, y)?;
    Ok(Kernel::new(y).direction(p, y, alpha))
}

/// Attractive and repulsive force sums,
/// `Σ_j α p_ij q_ij Z (y_i − y_j)` and `Σ_j q_ij² Z (y_i − y_j)`.
#[derive(Debug, Clone)]
pub struct Forces {
    pub attractive: Matrix,
    pub repulsive: Matrix,
}

pub fn forces(p: &PairDistribution, y: &Matrix, alpha: f64) -> Result<Forces> {
    check_sizes(p, y)?;
    let (n, s) = (y.rows(), y.cols());
    let kernel = Kernel::new(y);
    let mut attractive = Matrix::zeros(n, s);
    let mut repulsive = Matrix::zeros(n, s);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = pair_index(n, i, j);
            let w = kernel.w[k];
            let q = w / kernel.z;
            for c in 0..s {
                let diff = y.get(i, c) - y.get(j, c);
                attractive.row_mut(i)[c] += alpha * p.masses()[k] * w * diff;
                repulsive.row_mut(i)[c] += q * w * diff;
            }
        }
    }
    Ok(Forces {
        attractive,
        repulsive,
    })
}

/// Step size `h`. `Auto` resolves to `min(200, n / (4α))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

/// Momentum `γ` by iteration: each entry `(start, γ)` applies from `start`
/// until the next entry. Iterations before the first entry use `γ = 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct MomentumSchedule(pub Vec<(usize, f64)>);

impl Default for MomentumSchedule {
    fn default() -> Self {
        Self(vec![(0, 0.5), (250, 0.8)])
    }
}

impl MomentumSchedule {
    pub fn constant(gamma: f64) -> Self {
        Self(vec![(0, gamma)])
    }

    pub fn at(&self, iteration: usize) -> f64 {
        self.0
            .iter()
            .take_while(|(start, _)| *start <= iteration)
            .last()
            .map_or(0.0, |&(_, g)| g)
    }

    fn validate(&self) -> Result<()> {
        for w in self.0.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::param(
                    "momentum_schedule",
                    "start iterations must increase",
                ));
            }
        }
        for &(_, g) in &self.0 {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::param(
                    "momentum_schedule",
                    alloc::format!("γ = {g} outside [0, 1)"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct OptimizerConfig {
    /// Output dimension `s`.
    pub output_dim: usize,
    pub total_iterations: usize,
    pub exaggeration_iterations: usize,
    /// Exaggeration factor `α ≥ 1`.
    pub alpha: f64,
    pub step_size: StepSize,
    pub momentum_schedule: MomentumSchedule,
    /// Standard deviation of the Gaussian initialization.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            output_dim: 2,
            total_iterations: DEFAULT_TOTAL_ITERATIONS,
            exaggeration_iterations: DEFAULT_EXAGGERATION_ITERATIONS,
            alpha: DEFAULT_ALPHA,
            step_size: StepSize::Auto,
            momentum_schedule: MomentumSchedule::default(),
            init_scale: DEFAULT_INIT_SCALE,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.output_dim) {
            return Err(Error::param("output_dim", "must be 1, 2 or 3"));
        }
        if self.exaggeration_iterations > self.total_iterations {
            return Err(Error::param(
                "exaggeration_iterations",
                "exceeds total_iterations",
            ));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite and at least 1"));
        }
        if let StepSize::Fixed(h) = self.step_size {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::param("step_size", "must be positive and finite"));
            }
        }
        if !(self.init_scale > 0.0) || !self.init_scale.is_finite() {
            return Err(Error::param("init_scale", "must be positive and finite"));
        }
        self.momentum_schedule.validate()
    }

    /// The step size actually used for `n` points.
    pub fn resolved_step_size(&self, n: usize) -> f64 {
        match self.step_size {
            StepSize::Fixed(h) => h,
            StepSize::Auto => (n as f64 / (4.0 * self.alpha)).min(MAX_STEP_SIZE),
        }
    }

    /// Exaggeration factor in effect at `iteration`.
    pub fn alpha_at(&self, iteration: usize) -> f64 {
        if iteration < self.exaggeration_iterations {
            self.alpha
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub y: Matrix,
    /// The previous applied update.
    pub velocity: Matrix,
    /// Completed iterations.
    pub iteration: usize,
}

impl EmbeddingState {
    pub fn new(y: Matrix) -> Self {
        let velocity = Matrix::zeros(y.rows(), y.cols());
        Self {
            y,
            velocity,
            iteration: 0,
        }
    }

    /// I.i.d. Gaussian coordinates with standard deviation `init_scale`;
    /// point `i` draws from its own stream of `seed`.
    pub fn random(n: usize, config: &OptimizerConfig) -> Self {
        let s = config.output_dim;
        let mut y = Matrix::zeros(n, s);
        for i in 0..n {
            let mut r = rng::stream(config.seed, Purpose::Initialization, i as u64);
            let row = y.row_mut(i);
            rng::fill_standard_normal(&mut r, row);
            for v in row {
                *v *= config.init_scale;
            }
        }
        Self::new(y)
    }
}

fn apply_update(
    state: &mut EmbeddingState,
    direction: &Matrix,
    step: f64,
    gamma: f64,
) -> Result<()> {
    for ((y, v), &g) in state
        .y
        .as_mut_slice()
        .iter_mut()
        .zip(state.velocity.as_mut_slice())
        .zip(direction.as_slice())
    {
        let update = -step * g + gamma * *v;
        *y += update;
        *v = update;
    }
    state.iteration += 1;
    if !state.y.is_finite() {
        return Err(Error::Diverged {
            iteration: state.iteration,
        });
    }
    Ok(())
}

fn step_with_kernel(
    state: &mut EmbeddingState,
    kernel: &Kernel,
    p: &PairDistribution,
    config: &OptimizerConfig,
) -> Result<()> {
    let t = state.iteration;
    let direction = kernel.direction(p, &state.y, config.alpha_at(t));
    apply_update(
        state,
        &direction,
        config.resolved_step_size(p.n()),
        config.momentum_schedule.at(t),
    )
}

/// One update: `Δ = −h · direction + γ · velocity`, then `Y += Δ` and
/// `velocity = Δ`. On non-finite coordinates the error names the iteration
/// that produced them (1-based).
pub fn descent_step(
    state: &mut EmbeddingState,
    p: &PairDistribution,
    config: &OptimizerConfig,
) -> Result<()> {
    check_sizes(p, &state.y)?;
    if state.iteration >= config.total_iterations {
        return Err(Error::param(
            "iteration",
            "state has already completed total_iterations",
        ));
    }
    let kernel = Kernel::new(&state.y);
    step_with_kernel(state, &kernel, p, config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub y: Matrix,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: EmbeddingState,
    pub snapshots: Vec<Snapshot>,
    /// `D(P‖Q)` after each completed iteration, starting at iteration 0;
    /// always unexaggerated.
    pub objective_trace: Vec<f64>,
    pub step_size: f64,
}

/// Full optimization from a seeded random start.
///
/// `snapshot_iterations` must be strictly increasing and within
/// `0..=total_iterations`; iteration `0` captures the initialization.
pub fn run(
    p: &PairDistribution,
    config: &OptimizerConfig,
    snapshot_iterations: &[usize],
) -> Result<RunOutput> {
    config.validate()?;
    let state = EmbeddingState::random(p.n(), config);
    run_from(p, config, state, snapshot_iterations)
}

/// Like [`run`] but from a caller-supplied state.
pub fn run_from(
    p: &PairDistribution,
    config: &OptimizerConfig,
    mut state: EmbeddingState,
    snapshot_iterations: &[usize],
) -> Result<RunOutput> {
    config.validate()?;
    check_sizes(p, &state.y)?;
    if snapshot_iterations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "snapshot_iterations",
            "must be strictly increasing",
        ));
    }
    if snapshot_iterations
        .last()
        .is_some_and(|&t| t > config.total_iterations)
    {
        return Err(Error::param(
            "snapshot_iterations",
            "beyond total_iterations",
        ));
    }

    let mut snapshots = Vec::with_capacity(snapshot_iterations.len());
    let start = state.iteration;
    let mut pending = snapshot_iterations
        .iter()
        .copied()
        .filter(|&t| t >= start)
        .peekable();
    let mut trace = Vec::with_capacity(
        config.total_iterations + 1 - state.iteration.min(config.total_iterations),
    );

    loop {
        let kernel = Kernel::new(&state.y);
        trace.push(kernel.objective(p));
        if pending.peek() == Some(&state.iteration) {
            snapshots.push(Snapshot {
                iteration: state.iteration,
                y: state.y.clone(),
            });
            pending.next();
        }
        if state.iteration >= config.total_iterations {
            break;
        }
        step_with_kernel(&mut state, &kernel, p, config)?;
    }

    Ok(RunOutput {
        state,
        snapshots,
        objective_trace: trace,
        step_size: config.resolved_step_size(p.n()),
    })
}
