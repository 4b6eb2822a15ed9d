//! Feature-based outlier scores in bits: marginal, conditional, and the
//! Erlang-calibrated joint score.
//!
//! An outlier score here is `−log2` of a tail probability — a p-test in log
//! form. Conditional scores use the tail of the node's mechanism given its
//! parents. The joint score sums the per-mechanism scores and re-calibrates
//! the sum through the Erlang survival function, so that uniform conditional
//! p-values yield a joint score that is again exactly calibrated
//! (`P(λ ≥ c) = 2^{−c}`).

use std::f64::consts::LN_2;

use thiserror::Error;

use crate::stat_tests::{one_tailed_p, Reference, StatError};

/// Errors from outlier-score construction.
#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error("no conditional reference for the supplied parent values")]
    MissingConditionalReference,
    #[error("conditional score entries must be finite and nonnegative, got {0}")]
    InvalidConditionalBits(f64),
    #[error("need at least one conditional score")]
    EmptyConditionalScores,
}

/// An outlier score in bits (`−log2` of a tail probability), optionally
/// tagged with the feature statistic it was computed from and, for
/// conditional scores, the parent values it was conditioned on.
#[derive(Debug, Clone, PartialEq)]
pub struct ItScore {
    pub bits: f64,
    pub feature: Option<String>,
    pub parent_context: Option<Vec<f64>>,
}

impl ItScore {
    pub fn new(bits: f64) -> Self {
        debug_assert!(bits >= 0.0);
        Self {
            bits,
            feature: None,
            parent_context: None,
        }
    }

    /// Tag the score with the feature statistic's name.
    pub fn with_feature(mut self, feature: impl Into<String>) -> Self {
        self.feature = Some(feature.into());
        self
    }
}

/// Marginal outlier score: `−log2 P(τ(X) ≥ τ(x))` against the reference.
///
/// An analytic reference with an exactly-zero tail yields `+∞` bits; the
/// empirical add-one rule always yields a finite score.
pub fn it_score(tau_x: f64, reference: &Reference<'_>) -> Result<ItScore, ScoreError> {
    let p = one_tailed_p(tau_x, reference)?;
    Ok(ItScore::new(-p.value().log2()))
}

/// Resolves a node's conditional null reference from its parent values.
///
/// Implementations return the right-tail probability
/// `P(τ(X_j) ≥ t | PA_j = pa)`, or `None` when no reference exists for the
/// supplied parents. Empirical implementations should use
/// [`crate::stat_tests::add_one_right_tail`] so the score stays a valid
/// p-test.
pub trait ConditionalReference {
    fn right_tail(&self, parents: &[f64], t: f64) -> Option<f64>;
}

impl<F> ConditionalReference for F
where
    F: Fn(&[f64], f64) -> Option<f64>,
{
    fn right_tail(&self, parents: &[f64], t: f64) -> Option<f64> {
        self(parents, t)
    }
}

/// Conditional outlier score: `−log2 P(τ(X_j) ≥ τ(x_j) | PA_j = pa_j)`.
pub fn conditional_it_score(
    tau_xj: f64,
    parent_values: &[f64],
    reference: &dyn ConditionalReference,
) -> Result<ItScore, ScoreError> {
    let p = reference
        .right_tail(parent_values, tau_xj)
        .ok_or(ScoreError::MissingConditionalReference)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(ScoreError::Stat(StatError::InvalidValue {
            what: "conditional tail probability",
            value: p,
        }));
    }
    Ok(ItScore {
        bits: -p.log2(),
        feature: None,
        parent_context: Some(parent_values.to_vec()),
    })
}

/// Calibrated joint outlier score over `n` conditional scores.
///
/// With `S = ln 2 · Σ_j bits_j`, returns `−log2` of the Erlang-`n` survival
/// value `e^{−S} Σ_{i=0}^{n−1} S^i/i!`, evaluated in the log domain. `S` is a
/// sum of `n` Exp(1) draws when the conditional p-values are uniform, so the
/// output is then exactly calibrated. The single-score case passes through
/// unchanged, and the result never exceeds `Σ_j bits_j`.
pub fn erlang_joint_score(conditional_bits: &[f64]) -> Result<ItScore, ScoreError> {
    if conditional_bits.is_empty() {
        return Err(ScoreError::EmptyConditionalScores);
    }
    for &b in conditional_bits {
        if !b.is_finite() || b < 0.0 {
            return Err(ScoreError::InvalidConditionalBits(b));
        }
    }
    let n = conditional_bits.len();
    let total_bits: f64 = conditional_bits.iter().sum();
    if n == 1 {
        return Ok(ItScore::new(conditional_bits[0]));
    }
    if total_bits == 0.0 {
        return Ok(ItScore::new(0.0));
    }

    let s = total_bits * LN_2;
    // log Σ_{i=0}^{n−1} s^i/i! via log-sum-exp over t_i = i·ln s − ln i!.
    let ln_s = s.ln();
    let mut terms = Vec::with_capacity(n);
    let mut ln_fact = 0.0;
    for i in 0..n {
        if i > 0 {
            ln_fact += (i as f64).ln();
        }
        terms.push(i as f64 * ln_s - ln_fact);
    }
    let max_t = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max_t + terms.iter().map(|t| (t - max_t).exp()).sum::<f64>().ln();

    // −log2 survival = (S − log Σ)/ln 2; the correction is nonnegative.
    let bits = ((s - lse) / LN_2).max(0.0);
    Ok(ItScore::new(bits))
}
