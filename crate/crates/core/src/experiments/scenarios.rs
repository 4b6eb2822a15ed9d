//! The five registered scenarios.

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value as Json};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::attribution::attribute;
use crate::causal::{
    correction_matrix, inject_anomaly, mahalanobis_sq, marginal_mahalanobis_sq, sample,
    trial_seed, AnomalySpec, BitString, CausalModel, LinearScm, MechanismSpec, NodeSpec,
    Observation, Value,
};

use super::{ExperimentConfig, ExperimentError, ExperimentReport, TrialRecord};

fn report(
    cfg: &ExperimentConfig,
    records: Vec<TrialRecord>,
    summary: IndexMap<String, Json>,
    pass: bool,
) -> ExperimentReport {
    ExperimentReport {
        name: cfg.name.clone(),
        config: cfg.clone(),
        records,
        summary,
        pass,
    }
}

/// Uniform-digits chain `X1 → X2 → … → Xn`.
pub(crate) fn chain_model(n: usize, digits: u32) -> Result<CausalModel, ExperimentError> {
    let nodes = (1..=n)
        .map(|i| NodeSpec {
            id: format!("X{i}"),
            parents: if i == 1 {
                vec![]
            } else {
                vec![format!("X{}", i - 1)]
            },
            mechanism: MechanismSpec::UniformDigits { digits },
        })
        .collect();
    Ok(CausalModel::new(nodes)?)
}

/// Chain root-cause detection: inject a one-digit noise at a random node,
/// attribute, count correct recoveries. Passes at ≥ 95% correct.
pub fn run_chain_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let n = cfg.usize_param("n", 4)?;
    let digits = cfg.u64_param("d", 10)? as u32;
    let compressor = cfg.compressor_param()?;
    let model = chain_model(n, digits)?;
    let ids = model.topological_ids();

    let mut records = Vec::with_capacity(cfg.trials as usize);
    let mut successes = 0u64;
    for trial in 0..cfg.trials {
        let seed_t = trial_seed(cfg.seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_t);
        let target = ids[rng.gen_range(0..n)].to_string();
        let digit = rng.gen_range(0..=9u8);
        let base = sample(&model, rng.gen::<u64>(), 1)?.remove(0);
        let obs = inject_anomaly(&model, &base, &target, AnomalySpec::OneDigitNoise(digit))?;
        let rep = attribute(&model, &obs, compressor, seed_t)?;
        let correct = rep.root_cause == target;
        successes += u64::from(correct);
        records.push(IndexMap::from([
            ("trial".to_string(), json!(trial)),
            ("seed".to_string(), json!(seed_t)),
            ("injected_node".to_string(), json!(target)),
            ("digit".to_string(), json!(digit)),
            ("chosen".to_string(), json!(rep.root_cause)),
            ("correct".to_string(), json!(correct)),
            (
                "chosen_margin_bits".to_string(),
                json!(rep.per_node[&rep.root_cause].signed_margin()),
            ),
        ]));
    }

    // 95% rather than the nominal 100%: the token grammar's constants differ
    // from any other compressor's, and the margin still falsifies a broken
    // pipeline.
    let threshold = (cfg.trials as f64 * 0.95).ceil() as u64;
    let pass = successes >= threshold;
    let summary = IndexMap::from([
        ("trials".to_string(), json!(cfg.trials)),
        ("successes".to_string(), json!(successes)),
        (
            "success_rate".to_string(),
            json!(successes as f64 / cfg.trials as f64),
        ),
        ("pass_threshold".to_string(), json!(threshold)),
    ]);
    Ok(report(cfg, records, summary, pass))
}

/// The three-node linear model `X1 = N1, X2 = 2X1 + N2, X3 = X1 − X2 + N3`.
pub(crate) fn three_node_scm() -> LinearScm {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0, -1.0, 0.0]);
    LinearScm::new(a, vec![1.0, 1.0, 1.0]).expect("three-node coefficients are valid")
}

/// Root cause with a small marginal score: marginal z² of the perturbed node
/// is `n₂²/5`, its downstream effect scores `n₂²/3`, yet the conditional
/// score `n₂²` dominates both.
pub fn run_three_node_demo(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let n2_values = cfg.f64_list_param("n2", &[5.0, 8.0, 12.0])?;
    let scm = three_node_scm();
    let sigma = scm.covariance();
    let var_x2 = sigma[(1, 1)];
    let var_x3 = sigma[(2, 2)];
    let variances_exact = (var_x2 - 5.0).abs() <= 1e-12 && (var_x3 - 3.0).abs() <= 1e-12;

    let mut records = Vec::new();
    let mut orderings_hold = true;
    for &n2 in &n2_values {
        let x = scm.observation_from_noise(&[0.0, n2, 0.0])?;
        let marginal_x2 = x[1] * x[1] / var_x2;
        let marginal_x3 = x[2] * x[2] / var_x3;
        let conditional = scm.noise_score_decomposition(&x)?[1];
        let ordered = if n2 == 0.0 {
            marginal_x2 == 0.0 && marginal_x3 == 0.0 && conditional == 0.0
        } else {
            marginal_x2 < marginal_x3 && marginal_x3 < conditional
        };
        orderings_hold &= ordered;
        records.push(IndexMap::from([
            ("n2".to_string(), json!(n2)),
            ("marginal_z2_x2".to_string(), json!(marginal_x2)),
            ("marginal_z2_x3".to_string(), json!(marginal_x3)),
            ("conditional_z2_x2".to_string(), json!(conditional)),
            ("ordered".to_string(), json!(ordered)),
        ]));
    }

    let summary = IndexMap::from([
        ("var_x2".to_string(), json!(var_x2)),
        ("var_x3".to_string(), json!(var_x3)),
        ("variances_exact".to_string(), json!(variances_exact)),
        ("orderings_hold".to_string(), json!(orderings_hold)),
    ]);
    let pass = variances_exact && orderings_hold;
    Ok(report(cfg, records, summary, pass))
}

/// Build the XOR pair model (uniform bit root, XOR-constant child).
pub(crate) fn xor_pair_model(constant: BitString) -> Result<CausalModel, ExperimentError> {
    let d = constant.len_bits();
    Ok(CausalModel::new(vec![
        NodeSpec {
            id: "x".into(),
            parents: vec![],
            mechanism: MechanismSpec::XorConst {
                constant: BitString::zeros(d),
            },
        },
        NodeSpec {
            id: "y".into(),
            parents: vec!["x".into()],
            mechanism: MechanismSpec::XorConst { constant },
        },
    ])?)
}

fn xor_observation(x: BitString, constant: &BitString) -> Result<Observation, ExperimentError> {
    let y = x.xor(constant).map_err(crate::causal::SampleError::from)?;
    let mut values = IndexMap::new();
    values.insert("x".to_string(), Value::Bits(x));
    values.insert("y".to_string(), Value::Bits(y));
    Ok(Observation {
        values,
        noise: None,
    })
}

/// Least-squares slope of `y` on `x`.
fn fitted_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}

/// Additivity failure under an XOR mechanism: when the input coincides with
/// the mechanism's constant, the joint estimate (conditioned on the model's
/// constants) grows linearly in `d` while both per-mechanism estimates stay
/// at zero. Passes on a positive fitted gap slope with δ̂(y|x) = 0 throughout.
pub fn run_xor_demo(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let d_values = cfg.usize_list_param("d", &[256, 512, 1024, 2048, 4096])?;
    let compressor = cfg.compressor_param()?;

    let mut records = Vec::new();
    let mut gap_points = Vec::new();
    let mut y_always_zero = true;
    for &d in &d_values {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, d as u64));
        let constant = BitString::random(&mut rng, d);
        let model = xor_pair_model(constant.clone())?;

        // x = constant: y collapses to the all-zero word.
        let obs = xor_observation(constant.clone(), &constant)?;
        let rep = attribute(&model, &obs, compressor, cfg.seed)?;

        // Fresh random input: the joint stays incompressible.
        let fresh = xor_observation(BitString::random(&mut rng, d), &constant)?;
        let rep_fresh = attribute(&model, &fresh, compressor, cfg.seed)?;

        y_always_zero &= rep.per_node["y"].bits == 0.0 && rep_fresh.per_node["y"].bits == 0.0;
        gap_points.push((d as f64, rep.decomposition_gap_bits));
        records.push(IndexMap::from([
            ("d".to_string(), json!(d)),
            ("x_bits".to_string(), json!(rep.per_node["x"].bits)),
            ("y_given_x_bits".to_string(), json!(rep.per_node["y"].bits)),
            ("joint_bits".to_string(), json!(rep.joint_estimate_bits)),
            ("gap_bits".to_string(), json!(rep.decomposition_gap_bits)),
            (
                "gap_bits_fresh_input".to_string(),
                json!(rep_fresh.decomposition_gap_bits),
            ),
        ]));
    }

    let slope = fitted_slope(&gap_points);
    let pass = slope > 0.0 && y_always_zero;
    let summary = IndexMap::from([
        ("gap_slope_bits_per_bit".to_string(), json!(slope)),
        ("y_given_x_always_zero".to_string(), json!(y_always_zero)),
    ]);
    Ok(report(cfg, records, summary, pass))
}

/// Two-sided outlier score threshold: `λ(v; σ) ≥ c  ⟺  |v| ≥ σ·q(c)` with
/// `2·Φ(−q) = 2^{−c}`.
fn two_sided_threshold(c: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    -normal.inverse_cdf(2f64.powf(-c - 1.0))
}

/// Monte Carlo of the weak-to-strong tail bound on a linear-Gaussian pair
/// `X₂ = X₁ + N`: empirical `P(λ(X₂) ≥ t | λ(X₁) ≥ c) ≤ 2^{c−t} + 5σ̂`.
pub fn run_lemma1_mc(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let pairs = cfg.pair_list_param("pairs", &[(2.0, 5.0), (4.0, 8.0)])?;
    let draws = cfg.u64_param("n", 1_000_000)?;
    let sigma2 = 2f64.sqrt(); // Var(X₂) = 1 + 1

    let mut records = Vec::new();
    let mut pass = true;
    for (i, &(c, t)) in pairs.iter().enumerate() {
        let q1 = two_sided_threshold(c);
        let q2 = sigma2 * two_sided_threshold(t);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, i as u64));
        let mut conditioning = 0u64;
        let mut hits = 0u64;
        for _ in 0..draws {
            let x1: f64 = rng.sample(StandardNormal);
            let x2 = x1 + rng.sample::<f64, _>(StandardNormal);
            if x1.abs() >= q1 {
                conditioning += 1;
                hits += u64::from(x2.abs() >= q2);
            }
        }
        let empirical = if conditioning == 0 {
            0.0
        } else {
            hits as f64 / conditioning as f64
        };
        let sigma_hat = if conditioning == 0 {
            0.0
        } else {
            (empirical * (1.0 - empirical) / conditioning as f64).sqrt()
        };
        let bound = 2f64.powf(c - t);
        let ok = empirical <= bound + 5.0 * sigma_hat;
        pass &= ok;
        records.push(IndexMap::from([
            ("c".to_string(), json!(c)),
            ("t".to_string(), json!(t)),
            ("draws".to_string(), json!(draws)),
            ("conditioning_draws".to_string(), json!(conditioning)),
            ("hits".to_string(), json!(hits)),
            ("empirical".to_string(), json!(empirical)),
            ("bound".to_string(), json!(bound)),
            ("sigma_hat".to_string(), json!(sigma_hat)),
            ("ok".to_string(), json!(ok)),
        ]));
    }

    let summary = IndexMap::from([
        ("pairs_checked".to_string(), json!(pairs.len())),
        ("all_within_bound".to_string(), json!(pass)),
    ]);
    Ok(report(cfg, records, summary, pass))
}

/// Random-instance sweep of marginalization monotonicity and the PSD
/// correction matrix.
pub fn run_maha_monotonicity(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let dims = cfg.usize_list_param("dims", &[2, 3, 4, 5, 6])?;
    let instances = cfg.usize_param("instances", 10_000)?;

    let mut records = Vec::with_capacity(instances);
    let mut max_violation = f64::NEG_INFINITY;
    let mut min_eig_global = f64::INFINITY;
    for i in 0..instances {
        let dim = dims[i % dims.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, i as u64));
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sigma = &g * g.transpose() + DMatrix::identity(dim, dim) * 1e-6;
        let sigma = 0.5 * (&sigma + sigma.transpose());
        let x = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));

        let mut subset: Vec<usize> = (0..dim).collect();
        for j in (1..dim).rev() {
            subset.swap(j, rng.gen_range(0..=j));
        }
        subset.truncate(rng.gen_range(1..=dim));
        subset.sort_unstable();

        let full = mahalanobis_sq(&x, &sigma)?;
        let marginal = marginal_mahalanobis_sq(&x, &sigma, &subset)?;
        let violation = (marginal - full) / (1.0 + full);
        let c = correction_matrix(&sigma, &subset)?;
        let min_eig = c
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);

        max_violation = max_violation.max(violation);
        min_eig_global = min_eig_global.min(min_eig);
        records.push(IndexMap::from([
            ("instance".to_string(), json!(i)),
            ("dim".to_string(), json!(dim)),
            ("subset_size".to_string(), json!(subset.len())),
            ("full_m2".to_string(), json!(full)),
            ("marginal_m2".to_string(), json!(marginal)),
            ("relative_violation".to_string(), json!(violation)),
            ("correction_min_eigenvalue".to_string(), json!(min_eig)),
        ]));
    }

    let pass = max_violation <= 1e-9 && min_eig_global >= -1e-9;
    let summary = IndexMap::from([
        ("instances".to_string(), json!(instances)),
        ("max_relative_violation".to_string(), json!(max_violation)),
        ("min_correction_eigenvalue".to_string(), json!(min_eig_global)),
    ]);
    Ok(report(cfg, records, summary, pass))
}
