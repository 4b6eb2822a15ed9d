//! Causal models: DAG + mechanism representation, ancestral sampling,
//! anomaly injection, and the linear-Gaussian SCM algebra.

mod model;
mod sample;
mod scm;
mod value;

pub use model::{CausalModel, MechanismSpec, ModelError, NodeSpec, DETERMINISTIC_MAPS, MAX_DIGITS};
pub use sample::{inject_anomaly, inject_anomaly_seeded, sample, AnomalySpec, Noise, Observation, SampleError};
pub use scm::{
    correction_matrix, mahalanobis_sq, marginal_mahalanobis_sq, LinearScm, ScmError,
};
pub use value::{BitString, DigitValue, Value, ValueError};

/// Per-trial seed derivation used by every concurrent or repeated run:
/// trial `i` of base seed `s` uses `s ^ i` fed to the sampler's generator.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base ^ trial
}
