//! Statistics on `(X, P, Y, Q)` that mirror the collapse results for t-SNE.
//!
//! Every recorded [`Statistic`] carries the [`TheoremTag`] of the result it
//! probes.

mod balls;
mod blocks;
mod cap;
mod enclosing;
mod grid;

pub use balls::{covering_ball, theorem_ball_check, CoveringBall, TheoremBallCheck};
pub use blocks::{block_stats, p0_star, p1_star, BlockPartition, BlockStats};
pub use cap::cap_measure_bound;
pub use enclosing::{enclosing_ball, Ball};
pub use grid::{grid_collision_stats, GridStats, DEFAULT_FAR_THRESHOLD};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// The result a statistic is evidence for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TheoremTag {
    /// Far-apart inputs forced together by a bounded 2-D output (pigeonhole).
    PropVolume,
    /// The doubled frame keeps the objective bounded away from zero.
    PropDoubledFrame,
    /// Equidistant inputs collapse to a single point.
    PropSinglePoint,
    /// Sphere data collapse into a small ball.
    ThmSphere,
    /// Near-uniform `Q` implies most points share a small ball.
    LemmaSmallKl,
    /// Sphere samples give near-uniform `P`.
    LemmaConcentration,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 6] = [
        TheoremTag::PropVolume,
        TheoremTag::PropDoubledFrame,
        TheoremTag::PropSinglePoint,
        TheoremTag::ThmSphere,
        TheoremTag::LemmaSmallKl,
        TheoremTag::LemmaConcentration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::PropVolume => "prop_volume",
            TheoremTag::PropDoubledFrame => "prop_doubled_frame",
            TheoremTag::PropSinglePoint => "prop_single_point",
            TheoremTag::ThmSphere => "thm_sphere",
            TheoremTag::LemmaSmallKl => "lemma_small_kl",
            TheoremTag::LemmaConcentration => "lemma_concentration",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum StatValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Statistic {
    pub name: String,
    pub value: StatValue,
    pub theorem: TheoremTag,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport {
    pub statistics: Vec<Statistic>,
}

impl DiagnosticsReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        name: &str,
        value: StatValue,
        theorem: TheoremTag,
        params: &[(&str, f64)],
    ) {
        self.statistics.push(Statistic {
            name: name.into(),
            value,
            theorem,
            params: params.iter().map(|(k, v)| (String::from(*k), *v)).collect(),
        });
    }

    pub fn scalar(&mut self, name: &str, value: f64, theorem: TheoremTag, params: &[(&str, f64)]) {
        self.push(name, StatValue::Scalar(value), theorem, params);
    }

    pub fn get(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn scalar_value(&self, name: &str) -> Option<f64> {
        match self.get(name)?.value {
            StatValue::Scalar(v) => Some(v),
            StatValue::Vector(_) => None,
        }
    }
}
