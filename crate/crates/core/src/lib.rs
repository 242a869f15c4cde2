//! Deterministic simulator for computation reuse at the network edge.
//!
//! Tasks arrive as small bundles of feature-vector segments and run under
//! one of three strategies: ship everything to a distant cloud, compute
//! on a nearby edge server, or let the edge consult a capacity-bounded
//! reuse table first. The table matches near-duplicate inputs through a
//! random-hyperplane LSH index and evicts least-frequently-used entries,
//! so popular segments pay a lookup instead of a recompute.
//!
//! Everything downstream of a (master_seed, trial_index) pair is
//! reproducible bit for bit: workload, hashing, queueing, reports.
//! [`engine::run_experiment`] turns a [`engine::Scenario`] into a
//! [`metrics::MetricsReport`]; [`scenario::ScenarioFile`] is the JSON
//! schema the command-line front end reads.
//!
//! Vector math is generic over [`Scalar`] (f32 or f64); simulated clocks
//! and rates stay f64 throughout.

pub mod compute;
pub mod engine;
pub mod error;
pub mod lsh;
pub mod metrics;
pub mod network;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod table;
pub mod vector;
pub mod workload;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FeatureVec32 = vector::FeatureVector<f32>;
pub type FeatureVec64 = vector::FeatureVector<f64>;
pub type LshIndex32 = lsh::LshIndex<f32>;
pub type LshIndex64 = lsh::LshIndex<f64>;
pub type ReuseTable32 = table::ReuseTable<f32>;
pub type ReuseTable64 = table::ReuseTable<f64>;
