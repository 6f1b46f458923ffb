//! Estimating how hard it is to react to a change in a known world.
//!
//! The difficulty of a novelty is measured as a signed distance between the
//! solution space of the world before the change and the one after it. The
//! crate ships the metric itself ([`metric`]), small deterministic worlds to
//! compute it on ([`worlds`], [`novelty`]), exact and sampled solution-space
//! construction ([`sampling`]), and an evaluation harness that checks the
//! predicted difficulty against agent pass rates ([`harness`]).
//!
//! The metric is generic over [`Scalar`]; the aliases at the crate root fix
//! it to `f64`, which is what the worlds produce.

pub mod harness;
pub mod io;
pub mod metric;
pub mod novelty;
pub mod sampling;
mod scalar;
pub mod seed;
pub mod worlds;

pub use scalar::Scalar;

pub use metric::{
    classify_difficulty, partition_distance, partition_space, solution_distance, space_distance,
    DifficultyClass, MetricError, MetricKind, NormalizationMode,
};

pub type ActionVector = metric::ActionVector<f64>;
pub type ActionMetricSpec = metric::ActionMetricSpec<f64>;
pub type Solution = metric::Solution<f64>;
pub type SolutionSpace = metric::PartitionedSolutionSpace<f64>;
pub type DifficultyThresholds = metric::DifficultyThresholds<f64>;
pub type DifficultyReport = metric::DifficultyReport<f64>;
pub type PartitionBreakdown = metric::PartitionBreakdown<f64>;
