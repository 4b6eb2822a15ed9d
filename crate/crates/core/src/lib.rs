//! Calibrated outlier scoring and root-cause attribution on causal DAGs.
//!
//! The crate has three layers:
//!
//! - **Test algebra** ([`stat_tests`], [`it_scores`]): p-tests and e-tests in
//!   ratio/probability/log form, conversions and calibration between them,
//!   weighted combination rules, and tail-probability outlier scores in bits,
//!   including the Erlang-calibrated joint score over a network's mechanisms.
//! - **Complexity estimates** ([`lzc`], [`deficiency`]): bit-exact LZ77/LZ78
//!   compressed lengths used as computable upper bounds on description length,
//!   and the randomness-deficiency lower bounds built from them (compressor
//!   based, Gaussian z-score, binary-word, model-switch).
//! - **Causal layer** ([`causal`], [`attribution`], [`experiments`]): causal
//!   models with four mechanism kinds, ancestral sampling, anomaly injection,
//!   linear-SCM Mahalanobis algebra, per-mechanism deficiency attribution,
//!   and seeded, report-emitting experiment scenarios.
//!
//! Every runnable capability has a corresponding example under `examples/`;
//! the `outlier-attribution` binary exposes the same pipelines as subcommands
//! (`simulate`, `score`, `attribute`, `experiment`, `calibrate`).

pub mod attribution;
pub mod causal;
pub mod cli;
pub mod deficiency;
pub mod experiments;
pub mod it_scores;
pub mod lzc;
pub mod stat_tests;

pub use attribution::AttributionReport;
pub use causal::{CausalModel, LinearScm, MechanismSpec, Observation};
pub use deficiency::DeficiencyEstimate;
pub use it_scores::ItScore;
pub use lzc::Compressor;
pub use stat_tests::{Form, Kind, TestScore};
