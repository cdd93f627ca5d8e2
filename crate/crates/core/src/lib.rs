//! Exact t-SNE together with the statistics needed to study where it fails.
//!
//! The crate is `no_std` (it needs `alloc`) and splits into:
//!
//! * [`divergences`]: entropy, KL, total variation and chi-squared over
//!   probability vectors, plus the pair-indexed [`PairDistribution`].
//! * [`affinity`]: Gaussian conditional rows, perplexity calibration and
//!   symmetrization into the input-space distribution `P`.
//! * [`optimizer`]: Cauchy-kernel `Q`, the KL objective, its exact gradient
//!   and gradient descent with early exaggeration and momentum.
//! * [`datasets`]: seeded generators (spheres, split sphere, simplex clusters,
//!   doubled frame, orthonormal simplex) and a Jacobi-based PCA baseline.
//! * [`diagnostics`]: covering/enclosing balls, grid collisions, block masses
//!   and the spherical-cap bound.
//!
//! Enable the `std` feature for `std::error::Error` integration and the
//! `parallel` feature to spread per-row work over a rayon pool. Results do not
//! depend on the number of threads.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod affinity;
pub mod datasets;
pub mod diagnostics;
pub mod divergences;
pub mod error;
pub mod matrix;
pub mod optimizer;
pub mod rng;

mod par;

pub use affinity::{AffinityConfig, Bandwidth, BandwidthMode, BandwidthResult};
pub use datasets::{pca::Pca, PointCloud};
pub use diagnostics::{DiagnosticsReport, StatValue, Statistic, TheoremTag};
pub use divergences::{ConditionalRow, PairDistribution};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use optimizer::{EmbeddingState, MomentumSchedule, OptimizerConfig, RunOutput, StepSize};
