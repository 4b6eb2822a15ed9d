//! Named, seeded, report-emitting experiment scenarios.
//!
//! Every scenario is a pure function of `(name, seed, params)`: re-running
//! bitwise-reproduces the report. Reports carry per-trial records (enough to
//! recompute every summary independently), summary statistics, and a `pass`
//! flag evaluated against the scenario's registered acceptance rule.
//!
//! Registered scenarios:
//! - `chain`: root-cause detection on a uniform-digits chain with one-digit
//!   noise injections; passes at ≥ 95% correct attributions.
//! - `three_node`: exact score ordering for the three-node linear model
//!   where the root cause has the *smallest* marginal score.
//! - `xor`: additivity failure of deficiency estimates under an XOR
//!   mechanism whose input coincides with its constant; passes when the
//!   decomposition gap grows with the word width.
//! - `lemma1_tails`: Monte Carlo check that weak outliers rarely cause
//!   strong ones, `P(λ(X₂) ≥ t | λ(X₁) ≥ c) ≤ 2^{c−t}`.
//! - `maha_monotonicity`: marginal squared Mahalanobis distance never
//!   exceeds the full one; the explicit correction matrix is PSD.

mod scenarios;

use std::collections::BTreeMap;
use std::io::Write;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::attribution::AttributionError;
use crate::causal::{ModelError, SampleError, ScmError};
use crate::it_scores::ScoreError;
use crate::lzc::Compressor;

pub const REGISTERED_SCENARIOS: &[&str] = &[
    "chain",
    "three_node",
    "xor",
    "lemma1_tails",
    "maha_monotonicity",
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown scenario {name:?}; registered: {REGISTERED_SCENARIOS:?}")]
    UnknownScenario { name: String },
    #[error("trials must be ≥ 1")]
    NoTrials,
    #[error("bad parameter {key:?}: {reason}")]
    BadParam { key: String, reason: String },
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// A scenario invocation: name, base seed, trial count, and scenario-specific
/// parameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub trials: u64,
    #[serde(default)]
    pub params: BTreeMap<String, Json>,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, seed: u64, trials: u64) -> Self {
        Self {
            name: name.into(),
            seed,
            trials,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl Into<Json>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    fn bad(&self, key: &str, reason: impl Into<String>) -> ExperimentError {
        ExperimentError::BadParam {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn u64_param(&self, key: &str, default: u64) -> Result<u64, ExperimentError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().ok_or_else(|| self.bad(key, "expected an unsigned integer")),
        }
    }

    pub(crate) fn usize_param(&self, key: &str, default: usize) -> Result<usize, ExperimentError> {
        Ok(self.u64_param(key, default as u64)? as usize)
    }

    pub(crate) fn compressor_param(&self) -> Result<Compressor, ExperimentError> {
        match self.params.get("compressor") {
            None => Ok(Compressor::Lz77),
            Some(v) => v
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.bad("compressor", "expected \"lz77\" or \"lz78\"")),
        }
    }

    pub(crate) fn f64_list_param(
        &self,
        key: &str,
        default: &[f64],
    ) -> Result<Vec<f64>, ExperimentError> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(Json::Array(items)) => items
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| self.bad(key, "expected numbers")))
                .collect(),
            Some(v) => v
                .as_f64()
                .map(|x| vec![x])
                .ok_or_else(|| self.bad(key, "expected a number or array of numbers")),
        }
    }

    pub(crate) fn usize_list_param(
        &self,
        key: &str,
        default: &[usize],
    ) -> Result<Vec<usize>, ExperimentError> {
        let as_f64: Vec<f64> = default.iter().map(|&v| v as f64).collect();
        self.f64_list_param(key, &as_f64)?
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(self.bad(key, format!("{v} is not an unsigned integer")))
                }
            })
            .collect()
    }

    /// Pairs like `[[2,5],[4,8]]`.
    pub(crate) fn pair_list_param(
        &self,
        key: &str,
        default: &[(f64, f64)],
    ) -> Result<Vec<(f64, f64)>, ExperimentError> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(Json::Array(items)) => items
                .iter()
                .map(|item| {
                    let pair = item
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| self.bad(key, "expected [a, b] pairs"))?;
                    let a = pair[0].as_f64().ok_or_else(|| self.bad(key, "expected numbers"))?;
                    let b = pair[1].as_f64().ok_or_else(|| self.bad(key, "expected numbers"))?;
                    Ok((a, b))
                })
                .collect(),
            Some(_) => Err(self.bad(key, "expected an array of pairs")),
        }
    }
}

/// One per-trial record; keys are scenario-specific but constant within a
/// report, so the record list flattens to a CSV.
pub type TrialRecord = IndexMap<String, Json>;

/// Scenario output: config echo, per-trial records, summary statistics, and
/// the acceptance verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: IndexMap<String, Json>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Flat CSV of the per-trial records; the header comes from the first
    /// record's keys.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        if let Some(first) = self.records.first() {
            w.write_record(first.keys())?;
            for record in &self.records {
                let row: Vec<String> = first
                    .keys()
                    .map(|k| match record.get(k) {
                        Some(Json::String(s)) => s.clone(),
                        Some(v) => v.to_string(),
                        None => String::new(),
                    })
                    .collect();
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Run a registered scenario.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    match cfg.name.as_str() {
        "chain" => scenarios::run_chain_experiment(cfg),
        "three_node" => scenarios::run_three_node_demo(cfg),
        "xor" => scenarios::run_xor_demo(cfg),
        "lemma1_tails" => scenarios::run_lemma1_mc(cfg),
        "maha_monotonicity" => scenarios::run_maha_monotonicity(cfg),
        other => Err(ExperimentError::UnknownScenario {
            name: other.to_string(),
        }),
    }
}

pub use scenarios::{
    run_chain_experiment, run_lemma1_mc, run_maha_monotonicity, run_three_node_demo, run_xor_demo,
};
