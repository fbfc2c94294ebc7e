//! Sublinear-query average-degree estimation.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: exact simple undirected graphs, heavy/light partitions and
//!   ground-truth quantities (average degree, light-edge density, arboricity
//!   bounds, degeneracy).
//! - [`oracle`]: the seeded query-access layer with per-query-type counters.
//! - [`estimators`]: `CoinToss`, `MeanEst`, `AllAdvice`, `ThresholdAdvice`
//!   and `NoAdvice`.
//! - [`generators`]: the clique-plus-matching lower-bound family, forest
//!   unions and Erdős–Rényi baselines.
//! - [`verify`]: repeated-trial statistics, scaling sweeps and lemma-level
//!   empirical checks.
//! - [`bench`]: declarative experiment files driving [`verify`].

pub mod bench;
pub mod estimators;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod rational;
pub mod rng;
pub mod verify;

pub use estimators::{
    all_advice, coin_toss, mean_est, no_advice, threshold_advice, CoinTossResult, DegreeEstimate,
    EstimateError, EstimatorConfig, MeanEstResult, Sampling, TerminationPath,
};
pub use graph::{Graph, GraphError, GroundTruth, Partition};
pub use oracle::{QueryCounters, QueryOracle};
