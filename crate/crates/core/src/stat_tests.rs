//! p-test / e-test algebra: score forms, conversions, calibration, and
//! combination rules.
//!
//! A *p-test* in ratio form is a nonnegative statistic with
//! `P(Λ(X) ≥ 1/ε) ≤ ε` for every `ε > 0`; an *e-test* satisfies
//! `E[Λ(X)] ≤ 1`. Probability form is the reciprocal scale (an ordinary
//! p-value is a p-test in probability form), and log form is `log2` of the
//! ratio, measured in bits. All three forms carry the same information; the
//! conversions here are exact reciprocal / exponential maps, so a score in
//! probability form may exceed 1 in the weak-evidence region (ratio < 1).
//! Constructors that build p-values directly ([`one_tailed_p`],
//! [`two_tailed_p`]) always return values in `[0, 1]`.

use thiserror::Error;

/// Tolerance on weight sums: weights must sum to at most `1 + WEIGHT_SUM_SLACK`.
pub const WEIGHT_SUM_SLACK: f64 = 1e-12;

/// Whether a score bounds a tail probability (p-test) or an expectation (e-test).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    PTest,
    ETest,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kind::PTest => write!(f, "p-test"),
            Kind::ETest => write!(f, "e-test"),
        }
    }
}

/// The scale a score value is expressed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Value in `[0, ∞]`; large means anomalous.
    Ratio,
    /// Reciprocal of ratio form; a classical p-value lives in `[0, 1]`.
    Probability,
    /// `log2` of ratio form, in bits; in `[-∞, ∞]`.
    Log,
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Form::Ratio => write!(f, "ratio"),
            Form::Probability => write!(f, "probability"),
            Form::Log => write!(f, "log"),
        }
    }
}

/// Errors from the test algebra.
#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("expected a {expected}, got a {found}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("expected {expected} form, got {found} form")]
    FormMismatch { expected: Form, found: Form },
    #[error("invalid {what}: {value}")]
    InvalidValue { what: &'static str, value: f64 },
    #[error("empty empirical reference sample")]
    EmptyReference,
    #[error("cannot combine an empty list of scores")]
    EmptyCombination,
    #[error("{scores} scores but {weights} weights")]
    LengthMismatch { scores: usize, weights: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("observation has zero probability under the null (log P = -inf)")]
    UnsupportedUnderNull,
}

/// A scalar test statistic tagged with its kind and form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestScore {
    value: f64,
    kind: Kind,
    form: Form,
}

impl TestScore {
    /// Build a score, validating the value against the form's range.
    pub fn new(kind: Kind, form: Form, value: f64) -> Result<Self, StatError> {
        if value.is_nan() {
            return Err(StatError::InvalidValue {
                what: "score value",
                value,
            });
        }
        match form {
            Form::Ratio | Form::Probability if value < 0.0 => Err(StatError::InvalidValue {
                what: "score value",
                value,
            }),
            _ => Ok(Self { value, kind, form }),
        }
    }

    /// A p-test in ratio form.
    pub fn p_ratio(value: f64) -> Result<Self, StatError> {
        Self::new(Kind::PTest, Form::Ratio, value)
    }

    /// An e-test in ratio form (what the literature calls an e-value).
    pub fn e_ratio(value: f64) -> Result<Self, StatError> {
        Self::new(Kind::ETest, Form::Ratio, value)
    }

    /// A classical p-value: p-test in probability form, restricted to `[0, 1]`.
    pub fn p_value(value: f64) -> Result<Self, StatError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(StatError::InvalidValue {
                what: "p-value",
                value,
            });
        }
        Self::new(Kind::PTest, Form::Probability, value)
    }

    /// A p-test in log form (bits).
    pub fn p_log(bits: f64) -> Result<Self, StatError> {
        Self::new(Kind::PTest, Form::Log, bits)
    }

    /// An e-test in log form (bits).
    pub fn e_log(bits: f64) -> Result<Self, StatError> {
        Self::new(Kind::ETest, Form::Log, bits)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn form(&self) -> Form {
        self.form
    }

    /// The score's value re-expressed in ratio form.
    pub fn ratio_value(&self) -> f64 {
        match self.form {
            Form::Ratio => self.value,
            Form::Probability => recip_extended(self.value),
            Form::Log => self.value.exp2(),
        }
    }
}

/// Reciprocal with the extended-value conventions `1/0 = ∞`, `1/∞ = 0`.
fn recip_extended(v: f64) -> f64 {
    if v == 0.0 {
        f64::INFINITY
    } else if v.is_infinite() {
        0.0
    } else {
        1.0 / v
    }
}

/// Re-express a score in another form. The kind is unchanged; 0 and ∞ map to
/// the corresponding extended values (e.g. ratio 0 → log −∞).
pub fn convert_form(score: &TestScore, target: Form) -> TestScore {
    let ratio = score.ratio_value();
    let value = match target {
        Form::Ratio => ratio,
        Form::Probability => recip_extended(ratio),
        Form::Log => ratio.log2(),
    };
    TestScore {
        value,
        kind: score.kind,
        form: target,
    }
}

/// Relabel an e-test as a p-test (Markov's inequality); the value and form are
/// untouched. Errors if the score is already a p-test.
pub fn e_to_p(score: &TestScore) -> Result<TestScore, StatError> {
    if score.kind != Kind::ETest {
        return Err(StatError::KindMismatch {
            expected: Kind::ETest,
            found: score.kind,
        });
    }
    Ok(TestScore {
        kind: Kind::PTest,
        ..*score
    })
}

/// Calibrate a ratio-form p-test `Λ` into an e-test via
/// `Λ' = (Λ − ln Λ − 1) / ln²Λ`.
///
/// Ratio values below 1 are clamped to 1 first (the calibrator targets the
/// evidence region `Λ ≥ 1`), and the removable singularity at `Λ = 1`
/// evaluates to the analytic limit 1/2. Scores in another form are converted
/// to ratio form first.
pub fn ramdas_calibrate(p: &TestScore) -> Result<TestScore, StatError> {
    if p.kind != Kind::PTest {
        return Err(StatError::KindMismatch {
            expected: Kind::PTest,
            found: p.kind,
        });
    }
    let lam = p.ratio_value().max(1.0);
    let value = if lam.is_infinite() {
        f64::INFINITY
    } else {
        let u = lam - 1.0;
        if u < 1e-5 {
            // Series around the removable singularity; keeps the calibrator
            // smooth where the direct quotient cancels catastrophically.
            0.5 + u / 6.0
        } else {
            let l = u.ln_1p();
            (u - l) / (l * l)
        }
    };
    Ok(TestScore {
        value,
        kind: Kind::ETest,
        form: Form::Ratio,
    })
}

/// Positive weights summing to at most 1 (within [`WEIGHT_SUM_SLACK`]).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, StatError> {
        if weights.is_empty() {
            return Err(StatError::InvalidWeights("empty weight list".into()));
        }
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(StatError::InvalidWeights(format!(
                    "weights must be finite and positive, got {w}"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum > 1.0 + WEIGHT_SUM_SLACK {
            return Err(StatError::InvalidWeights(format!(
                "weights sum to {sum} > 1"
            )));
        }
        Ok(Self(weights))
    }

    /// `n` equal weights `1/n`.
    pub fn uniform(n: usize) -> Result<Self, StatError> {
        if n == 0 {
            return Err(StatError::InvalidWeights("empty weight list".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_combination(
    scores: &[TestScore],
    w: &WeightVector,
    kind: Kind,
) -> Result<(), StatError> {
    if scores.is_empty() {
        return Err(StatError::EmptyCombination);
    }
    if scores.len() != w.len() {
        return Err(StatError::LengthMismatch {
            scores: scores.len(),
            weights: w.len(),
        });
    }
    for s in scores {
        if s.kind != kind {
            return Err(StatError::KindMismatch {
                expected: kind,
                found: s.kind,
            });
        }
        if s.form != Form::Ratio {
            return Err(StatError::FormMismatch {
                expected: Form::Ratio,
                found: s.form,
            });
        }
    }
    Ok(())
}

/// Weighted combination of ratio-form p-tests: `sup_i w_i Λ_i` is again a
/// p-test. The output dominates every `w_i Λ_i` exactly.
pub fn combine_p(scores: &[TestScore], w: &WeightVector) -> Result<TestScore, StatError> {
    check_combination(scores, w, Kind::PTest)?;
    let value = scores
        .iter()
        .zip(w.weights())
        .map(|(s, &wi)| wi * s.value)
        .fold(0.0f64, f64::max);
    TestScore::p_ratio(value)
}

/// Weighted combination of ratio-form e-tests: `Σ_i w_i Λ_i` is again an
/// e-test. The output dominates every `w_i Λ_i` exactly.
pub fn combine_e(scores: &[TestScore], w: &WeightVector) -> Result<TestScore, StatError> {
    check_combination(scores, w, Kind::ETest)?;
    let value = scores
        .iter()
        .zip(w.weights())
        .map(|(s, &wi)| wi * s.value)
        .sum();
    TestScore::e_ratio(value)
}

/// Analytic tail functions of a feature statistic's null distribution.
pub trait SurvivalFn {
    /// `P(τ(X) ≥ t)`.
    fn right_tail(&self, t: f64) -> f64;

    /// `P(τ(X) ≤ t)`; for continuous distributions the complement of the
    /// right tail.
    fn left_tail(&self, t: f64) -> f64 {
        (1.0 - self.right_tail(t)).clamp(0.0, 1.0)
    }
}

/// Standard Gaussian N(0, 1) tails.
#[derive(Debug, Clone, Copy, Default)]
pub struct StdGaussian;

impl SurvivalFn for StdGaussian {
    fn right_tail(&self, t: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(t / std::f64::consts::SQRT_2)
    }

    fn left_tail(&self, t: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(-t / std::f64::consts::SQRT_2)
    }
}

/// Uniform distribution on [0, 1].
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform01;

impl SurvivalFn for Uniform01 {
    fn right_tail(&self, t: f64) -> f64 {
        (1.0 - t).clamp(0.0, 1.0)
    }

    fn left_tail(&self, t: f64) -> f64 {
        t.clamp(0.0, 1.0)
    }
}

/// Gaussian N(mean, sd) tails.
#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl SurvivalFn for Gaussian {
    fn right_tail(&self, t: f64) -> f64 {
        StdGaussian.right_tail((t - self.mean) / self.sd)
    }

    fn left_tail(&self, t: f64) -> f64 {
        StdGaussian.left_tail((t - self.mean) / self.sd)
    }
}

/// Null reference for tail p-values: either an analytic survival function or
/// an empirical sample of feature values.
pub enum Reference<'a> {
    Survival(&'a dyn SurvivalFn),
    Samples(&'a [f64]),
}

/// Empirical right tail under the add-one rule: `(1 + #{τ_i ≥ t}) / (n + 1)`.
///
/// The correction makes the empirical score itself a valid p-test under
/// exchangeability of the reference sample with the test point.
pub fn add_one_right_tail(samples: &[f64], t: f64) -> Result<f64, StatError> {
    add_one_tail(samples, t, |s, t| s >= t)
}

/// Empirical left tail under the add-one rule: `(1 + #{τ_i ≤ t}) / (n + 1)`.
pub fn add_one_left_tail(samples: &[f64], t: f64) -> Result<f64, StatError> {
    add_one_tail(samples, t, |s, t| s <= t)
}

fn add_one_tail(
    samples: &[f64],
    t: f64,
    hit: impl Fn(f64, f64) -> bool,
) -> Result<f64, StatError> {
    if samples.is_empty() {
        return Err(StatError::EmptyReference);
    }
    if t.is_nan() {
        return Err(StatError::InvalidValue {
            what: "feature value",
            value: t,
        });
    }
    let count = samples.iter().filter(|&&s| hit(s, t)).count();
    Ok((1 + count) as f64 / (samples.len() + 1) as f64)
}

/// One-tailed p-value of a feature value against a reference:
/// `P(τ(X) ≥ τ(x))` in analytic mode, the add-one empirical tail otherwise.
pub fn one_tailed_p(tau_x: f64, reference: &Reference<'_>) -> Result<TestScore, StatError> {
    let p = match reference {
        Reference::Survival(sf) => checked_tail(sf.right_tail(tau_x))?,
        Reference::Samples(samples) => add_one_right_tail(samples, tau_x)?,
    };
    TestScore::p_value(p)
}

/// Two-tailed p-value: `min{1, 2·min(right tail, left tail)}` at `τ(x)`,
/// with the same analytic/empirical conventions as [`one_tailed_p`].
pub fn two_tailed_p(tau_x: f64, reference: &Reference<'_>) -> Result<TestScore, StatError> {
    let (right, left) = match reference {
        Reference::Survival(sf) => (
            checked_tail(sf.right_tail(tau_x))?,
            checked_tail(sf.left_tail(tau_x))?,
        ),
        Reference::Samples(samples) => (
            add_one_right_tail(samples, tau_x)?,
            add_one_left_tail(samples, tau_x)?,
        ),
    };
    TestScore::p_value((2.0 * right.min(left)).min(1.0))
}

fn checked_tail(p: f64) -> Result<f64, StatError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatError::InvalidValue {
            what: "tail probability",
            value: p,
        });
    }
    Ok(p)
}

/// Likelihood-ratio e-test in log form: `log2 Q(x) − log2 P(x)` bits for an
/// alternative `Q` against the null `P`. Errors when `P(x) = 0`.
pub fn likelihood_ratio_e(log_q_bits: f64, log_p_bits: f64) -> Result<TestScore, StatError> {
    if log_p_bits.is_nan() || log_q_bits.is_nan() {
        return Err(StatError::InvalidValue {
            what: "log probability",
            value: if log_p_bits.is_nan() {
                log_p_bits
            } else {
                log_q_bits
            },
        });
    }
    if log_p_bits == f64::NEG_INFINITY {
        return Err(StatError::UnsupportedUnderNull);
    }
    TestScore::e_log(log_q_bits - log_p_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn convert_ratio_to_log() {
        let s = TestScore::p_ratio(8.0).unwrap();
        let log = convert_form(&s, Form::Log);
        assert_eq!(log.form(), Form::Log);
        assert_eq!(log.kind(), Kind::PTest);
        assert_relative_eq!(log.value(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn convert_probability_to_ratio() {
        let s = TestScore::p_value(0.25).unwrap();
        let ratio = convert_form(&s, Form::Ratio);
        assert_relative_eq!(ratio.value(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn convert_zero_ratio_to_log_is_neg_inf() {
        let s = TestScore::e_ratio(0.0).unwrap();
        assert_eq!(convert_form(&s, Form::Log).value(), f64::NEG_INFINITY);
    }

    #[test]
    fn convert_keeps_kind() {
        let s = TestScore::e_ratio(5.0).unwrap();
        assert_eq!(convert_form(&s, Form::Probability).kind(), Kind::ETest);
    }

    #[test]
    fn e_to_p_is_identity_on_value_and_form() {
        let e = TestScore::e_ratio(5.0).unwrap();
        let p = e_to_p(&e).unwrap();
        assert_eq!(p.kind(), Kind::PTest);
        assert_eq!(p.form(), Form::Ratio);
        assert_eq!(p.value(), 5.0);

        let unit = e_to_p(&TestScore::e_ratio(1.0).unwrap()).unwrap();
        assert_eq!(unit.value(), 1.0);

        let bits = e_to_p(&TestScore::e_log(3.0).unwrap()).unwrap();
        assert_eq!(bits.form(), Form::Log);
        assert_eq!(bits.value(), 3.0);
    }

    #[test]
    fn e_to_p_rejects_p_tests() {
        let p = TestScore::p_ratio(5.0).unwrap();
        assert!(matches!(
            e_to_p(&p),
            Err(StatError::KindMismatch { .. })
        ));
    }

    #[test]
    fn ramdas_at_one_is_half() {
        let p = TestScore::p_ratio(1.0).unwrap();
        let e = ramdas_calibrate(&p).unwrap();
        assert_eq!(e.kind(), Kind::ETest);
        assert_eq!(e.value(), 0.5);
    }

    #[test]
    fn ramdas_at_e_is_e_minus_two() {
        // (e - ln e - 1)/ln²e = e - 2, evaluated directly.
        let p = TestScore::p_ratio(std::f64::consts::E).unwrap();
        let e = ramdas_calibrate(&p).unwrap();
        assert_relative_eq!(e.value(), std::f64::consts::E - 2.0, max_relative = 1e-12);
    }

    #[test]
    fn ramdas_at_hundred() {
        // High-precision evaluation of (100 - ln 100 - 1)/ln²100.
        let p = TestScore::p_ratio(100.0).unwrap();
        let e = ramdas_calibrate(&p).unwrap();
        assert_relative_eq!(e.value(), 4.450992260085819, max_relative = 1e-12);
    }

    #[test]
    fn ramdas_clamps_below_one() {
        let weak = TestScore::p_ratio(0.25).unwrap();
        let unit = TestScore::p_ratio(1.0).unwrap();
        assert_eq!(
            ramdas_calibrate(&weak).unwrap().value(),
            ramdas_calibrate(&unit).unwrap().value()
        );
    }

    #[test]
    fn combine_p_examples() {
        let scores = [
            TestScore::p_ratio(2.0).unwrap(),
            TestScore::p_ratio(8.0).unwrap(),
        ];
        let w = WeightVector::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(combine_p(&scores, &w).unwrap().value(), 2.0);

        let single = [TestScore::p_ratio(10.0).unwrap()];
        let w1 = WeightVector::new(vec![1.0]).unwrap();
        assert_eq!(combine_p(&single, &w1).unwrap().value(), 10.0);

        let sym = [
            TestScore::p_ratio(4.0).unwrap(),
            TestScore::p_ratio(4.0).unwrap(),
            TestScore::p_ratio(4.0).unwrap(),
        ];
        let w3 = WeightVector::uniform(3).unwrap();
        assert_relative_eq!(
            combine_p(&sym, &w3).unwrap().value(),
            4.0 / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn combine_e_examples() {
        let scores = [
            TestScore::e_ratio(1.0).unwrap(),
            TestScore::e_ratio(3.0).unwrap(),
        ];
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(combine_e(&scores, &w).unwrap().value(), 2.0);

        let single = [TestScore::e_ratio(7.0).unwrap()];
        let w1 = WeightVector::new(vec![1.0]).unwrap();
        assert_eq!(combine_e(&single, &w1).unwrap().value(), 7.0);

        let zeros = [
            TestScore::e_ratio(0.0).unwrap(),
            TestScore::e_ratio(0.0).unwrap(),
        ];
        assert_eq!(combine_e(&zeros, &w).unwrap().value(), 0.0);
    }

    #[test]
    fn combine_rejects_empty_and_mismatched() {
        let w = WeightVector::new(vec![0.5]).unwrap();
        assert_eq!(combine_p(&[], &w), Err(StatError::EmptyCombination));
        let scores = [
            TestScore::p_ratio(1.0).unwrap(),
            TestScore::p_ratio(2.0).unwrap(),
        ];
        assert!(matches!(
            combine_p(&scores, &w),
            Err(StatError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.0]).is_err());
        assert!(WeightVector::new(vec![-0.1]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        // Three thirds are fine despite rounding.
        assert!(WeightVector::uniform(3).is_ok());
    }

    #[test]
    fn one_tailed_empirical_add_one() {
        let samples = [1.0, 2.0, 3.0, 4.0, 5.0];
        let p = one_tailed_p(4.0, &Reference::Samples(&samples)).unwrap();
        assert_relative_eq!(p.value(), 0.5, max_relative = 1e-12);

        let p = one_tailed_p(10.0, &Reference::Samples(&samples)).unwrap();
        assert_relative_eq!(p.value(), 1.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn one_tailed_analytic_gaussian_median() {
        let p = one_tailed_p(0.0, &Reference::Survival(&StdGaussian)).unwrap();
        assert_relative_eq!(p.value(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn one_tailed_empty_reference_errors() {
        assert_eq!(
            one_tailed_p(1.0, &Reference::Samples(&[])),
            Err(StatError::EmptyReference)
        );
    }

    #[test]
    fn two_tailed_analytic() {
        let p = two_tailed_p(0.0, &Reference::Survival(&StdGaussian)).unwrap();
        assert_eq!(p.value(), 1.0);

        let p = two_tailed_p(0.95, &Reference::Survival(&Uniform01)).unwrap();
        assert_relative_eq!(p.value(), 0.1, max_relative = 1e-9);
    }

    #[test]
    fn two_tailed_empirical_add_one() {
        // Hand count under the add-one rule: right tail (1 + #{τ_i ≥ 5})/6 =
        // 2/6, left tail (1 + #{τ_i ≤ 5})/6 = 1, so 2·min = 2/3.
        let samples = [1.0, 2.0, 3.0, 4.0, 5.0];
        let p = two_tailed_p(5.0, &Reference::Samples(&samples)).unwrap();
        assert_relative_eq!(p.value(), 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn likelihood_ratio_examples() {
        assert_eq!(likelihood_ratio_e(-3.0, -3.0).unwrap().value(), 0.0);
        assert_eq!(likelihood_ratio_e(-2.0, -5.0).unwrap().value(), 3.0);
        let zero_q = likelihood_ratio_e(f64::NEG_INFINITY, -5.0).unwrap();
        assert_eq!(zero_q.value(), f64::NEG_INFINITY);
        assert_eq!(zero_q.kind(), Kind::ETest);
        assert_eq!(
            likelihood_ratio_e(-2.0, f64::NEG_INFINITY),
            Err(StatError::UnsupportedUnderNull)
        );
    }

    proptest! {
        // Form round-trips are the identity within 1e-12 relative.
        #[test]
        fn form_round_trip(v in 1e-300f64..1e300, start in 0usize..3, target in 0usize..3) {
            let forms = [Form::Ratio, Form::Probability, Form::Log];
            let s = TestScore::new(Kind::PTest, forms[start], if forms[start] == Form::Log { v.log2() } else { v }).unwrap();
            let there = convert_form(&s, forms[target]);
            let back = convert_form(&there, forms[start]);
            prop_assert!((back.value() - s.value()).abs() <= 1e-12 * s.value().abs().max(1e-300));
        }

        // The Ramdas calibrator is monotone nondecreasing on [1, ∞).
        #[test]
        fn ramdas_monotone(a in 1.0f64..1e8, step in 1e-9f64..1e8) {
            let lo = ramdas_calibrate(&TestScore::p_ratio(a).unwrap()).unwrap().value();
            let hi = ramdas_calibrate(&TestScore::p_ratio(a + step).unwrap()).unwrap().value();
            prop_assert!(hi >= lo, "f({}) = {} > f({}) = {}", a, lo, a + step, hi);
        }

        // Combinations dominate each weighted component exactly.
        #[test]
        fn combinations_dominate_components(
            values in prop::collection::vec(0.0f64..1e6, 1..6),
            raw_w in prop::collection::vec(0.01f64..1.0, 1..6),
        ) {
            let n = values.len().min(raw_w.len());
            let values = &values[..n];
            let total: f64 = raw_w[..n].iter().sum();
            let w = WeightVector::new(raw_w[..n].iter().map(|x| x / total).collect()).unwrap();

            let ps: Vec<_> = values.iter().map(|&v| TestScore::p_ratio(v).unwrap()).collect();
            let es: Vec<_> = values.iter().map(|&v| TestScore::e_ratio(v).unwrap()).collect();
            let p = combine_p(&ps, &w).unwrap().value();
            let e = combine_e(&es, &w).unwrap().value();
            for (v, wi) in values.iter().zip(w.weights()) {
                prop_assert!(p >= wi * v);
                prop_assert!(e >= wi * v);
            }
        }
    }
}
