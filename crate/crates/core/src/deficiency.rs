//! Computable lower bounds on (conditional) randomness deficiency.
//!
//! A randomness deficiency compares the negative log-probability of an
//! outcome with the length of a short description of it: an outcome is
//! anomalous when it can be described in substantially fewer bits than its
//! Shannon code length. Exact description lengths are uncomputable, so every
//! estimator here replaces them with a computable upper bound (a compressed
//! length, or an analytic counting/coding argument), which makes the
//! resulting deficiency a computable *lower* bound. All bounds clamp at
//! zero: a deficiency lower bound below zero is vacuous.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lzc::{Compressor, LzError};

/// Errors from deficiency estimation.
#[derive(Debug, Error, PartialEq)]
pub enum DeficiencyError {
    #[error(transparent)]
    Lz(#[from] LzError),
    #[error("{what} must be finite, got {value}")]
    NotFinite { what: &'static str, value: f64 },
    #[error("z = 0 is an exact-mode coincidence; use deficiency_estimate on the discretized value instead")]
    ZeroZScore,
    #[error("invalid binary-word parameters: {0}")]
    InvalidBinaryWord(String),
}

/// A per-outcome deficiency estimate in bits, with its two components.
///
/// `bits = max(0, neg_log_prob_bits − complexity_bits)`; `clamped` records
/// whether the signed margin was negative. The signed margin itself stays
/// available through [`DeficiencyEstimate::signed_margin`], since rankings
/// between non-anomalous outcomes live entirely below the clamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyEstimate {
    pub bits: f64,
    pub neg_log_prob_bits: f64,
    pub complexity_bits: f64,
    pub clamped: bool,
}

impl DeficiencyEstimate {
    pub fn from_components(neg_log_prob_bits: f64, complexity_bits: f64) -> Self {
        let margin = neg_log_prob_bits - complexity_bits;
        Self {
            bits: margin.max(0.0),
            neg_log_prob_bits,
            complexity_bits,
            clamped: margin < 0.0,
        }
    }

    /// `neg_log_prob_bits − complexity_bits` without the clamp.
    pub fn signed_margin(&self) -> f64 {
        self.neg_log_prob_bits - self.complexity_bits
    }

    /// An exactly-zero estimate (deterministic mechanisms).
    pub fn zero() -> Self {
        Self::from_components(0.0, 0.0)
    }
}

/// Compressor-backed conditional deficiency estimate: the complexity term is
/// the conditional compressed length of `x` given `ctx`.
pub fn deficiency_estimate(
    neg_log_prob_bits: f64,
    x: &[u8],
    ctx: &[u8],
    c: Compressor,
) -> Result<DeficiencyEstimate, DeficiencyError> {
    let ctx_parts: &[&[u8]] = if ctx.is_empty() { &[] } else { &[ctx] };
    deficiency_estimate_parts(neg_log_prob_bits, &[x], ctx_parts, c)
}

/// Multi-part form of [`deficiency_estimate`]; payload parts join around
/// separator bytes on both sides.
pub fn deficiency_estimate_parts(
    neg_log_prob_bits: f64,
    x_parts: &[&[u8]],
    ctx_parts: &[&[u8]],
    c: Compressor,
) -> Result<DeficiencyEstimate, DeficiencyError> {
    if !neg_log_prob_bits.is_finite() {
        return Err(DeficiencyError::NotFinite {
            what: "neg_log_prob_bits",
            value: neg_log_prob_bits,
        });
    }
    let complexity = crate::lzc::cond_complexity_estimate_parts(x_parts, ctx_parts, c)? as f64;
    Ok(DeficiencyEstimate::from_components(
        neg_log_prob_bits,
        complexity,
    ))
}

/// Deficiency bound for a Gaussian observation with z-score `z` (offset in σ
/// units): `max(0, (log2 e)/2 · z² − 2·log2(max(|z|, 2)))`.
///
/// The description cost of the offset is charged as `2·log2|z|`, with the
/// `max(|z|, 2)` guard keeping the term defined near the mode. `z = 0` is
/// rejected: an exactly-central value is the coincidence regime that the
/// squared-offset feature cannot see.
pub fn gaussian_deficiency_bound(z: f64) -> Result<f64, DeficiencyError> {
    if !z.is_finite() {
        return Err(DeficiencyError::NotFinite {
            what: "z",
            value: z,
        });
    }
    if z == 0.0 {
        return Err(DeficiencyError::ZeroZScore);
    }
    Ok(gaussian_estimate(z).bits)
}

/// Component form of the Gaussian bound, defined for all finite `z`
/// (at `z = 0` both the likelihood term and the clamp yield zero evidence).
pub fn gaussian_estimate(z: f64) -> DeficiencyEstimate {
    let neg_log_prob = std::f64::consts::LOG2_E / 2.0 * z * z;
    let complexity = 2.0 * z.abs().max(2.0).log2();
    DeficiencyEstimate::from_components(neg_log_prob, complexity)
}

/// Which bound to use for binary words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryBoundMode {
    /// Exact Hamming-weight counting: charges `log2 C(m,ℓ) + log2(m+1)` bits
    /// of description cost, with the binomial computed in exact arithmetic.
    Exact,
    /// Large-`m` form: `m · D(ℓ/m ‖ p)` with the binary KL divergence in bits.
    Kl,
}

fn check_binary_word(m: u32, l: u32, p: f64) -> Result<(), DeficiencyError> {
    if m == 0 {
        return Err(DeficiencyError::InvalidBinaryWord("m must be ≥ 1".into()));
    }
    if l > m {
        return Err(DeficiencyError::InvalidBinaryWord(format!(
            "ℓ = {l} exceeds m = {m}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(DeficiencyError::InvalidBinaryWord(format!(
            "p = {p} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Exact binomial coefficient.
fn binomial(m: u32, l: u32) -> BigUint {
    let l = l.min(m - l.min(m));
    let mut c = BigUint::from(1u32);
    for i in 1..=u64::from(l) {
        c = c * BigUint::from(u64::from(m) - u64::from(l) + i) / BigUint::from(i);
    }
    c
}

/// Signed log2 e-value of the exact Hamming-weight test, before clamping:
/// `−ℓ·log2 p − (m−ℓ)·log2(1−p) − log2 C(m,ℓ) − log2(m+1)`.
///
/// Summed over all words, `P(w)·2^{value}` totals exactly 1, so the exact
/// bound is a valid e-test on this signed scale;
/// [`binary_word_deficiency_bound`] clamps it at zero.
pub fn binary_word_evidence(m: u32, l: u32, p: f64) -> Result<f64, DeficiencyError> {
    check_binary_word(m, l, p)?;
    let (m_f, l_f) = (f64::from(m), f64::from(l));
    let log_binom = binomial(m, l)
        .to_f64()
        .expect("binomial overflows f64 only for m in the thousands")
        .log2();
    Ok(-l_f * p.log2() - (m_f - l_f) * (1.0 - p).log2() - log_binom - (m_f + 1.0).log2())
}

/// Binary KL divergence `D(q ‖ p)` in bits, with `0·log 0 = 0`.
pub fn binary_kl_bits(q: f64, p: f64) -> f64 {
    let mut d = 0.0;
    if q > 0.0 {
        d += q * (q / p).log2();
    }
    if q < 1.0 {
        d += (1.0 - q) * ((1.0 - q) / (1.0 - p)).log2();
    }
    d
}

/// Deficiency bound for an `m`-bit word of Hamming weight `ℓ` under
/// independent Bernoulli(`p`) bits.
pub fn binary_word_deficiency_bound(
    m: u32,
    l: u32,
    p: f64,
    mode: BinaryBoundMode,
) -> Result<f64, DeficiencyError> {
    match mode {
        BinaryBoundMode::Exact => Ok(binary_word_evidence(m, l, p)?.max(0.0)),
        BinaryBoundMode::Kl => {
            check_binary_word(m, l, p)?;
            Ok((f64::from(m) * binary_kl_bits(f64::from(l) / f64::from(m), p)).max(0.0))
        }
    }
}

/// Model-switch deficiency bound: evidence from re-explaining `x` under an
/// alternative model, minus the description cost of switching to it:
/// `max(0, (log2 Palt(x) − log2 P(x)) − desc_cost_bits)`.
pub fn model_switch_bound(
    log_p_bits: f64,
    log_palt_bits: f64,
    desc_cost_bits: f64,
) -> Result<f64, DeficiencyError> {
    if !log_p_bits.is_finite() {
        return Err(DeficiencyError::NotFinite {
            what: "log_p_bits",
            value: log_p_bits,
        });
    }
    if log_palt_bits.is_nan() || log_palt_bits == f64::INFINITY {
        return Err(DeficiencyError::NotFinite {
            what: "log_palt_bits",
            value: log_palt_bits,
        });
    }
    if !desc_cost_bits.is_finite() || desc_cost_bits < 0.0 {
        return Err(DeficiencyError::NotFinite {
            what: "desc_cost_bits",
            value: desc_cost_bits,
        });
    }
    Ok(((log_palt_bits - log_p_bits) - desc_cost_bits).max(0.0))
}
