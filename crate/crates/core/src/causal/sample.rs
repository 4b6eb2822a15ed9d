//! Ancestral sampling, noise provenance, and anomaly injection.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use super::model::{CausalModel, MechanismSpec};
use super::value::{BitString, DigitValue, Value, ValueError};

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("node {node:?} expects {expected} parent values, got {got}")]
    ParentArity {
        node: String,
        expected: usize,
        got: usize,
    },
    #[error("node {node:?} ({mechanism}) cannot consume a {found} parent value")]
    ParentType {
        node: String,
        mechanism: &'static str,
        found: &'static str,
    },
    #[error("anomaly spec {spec} does not apply to node {node:?} ({mechanism})")]
    SpecMismatch {
        spec: &'static str,
        node: String,
        mechanism: &'static str,
    },
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("observation carries no noise provenance; sample one or supply a seed")]
    MissingProvenance,
    #[error("digit noise must be a single digit 0..=9, got {0}")]
    BadDigit(u8),
    #[error(transparent)]
    Value(#[from] ValueError),
}

/// Per-node noise record.
#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    Real(f64),
    Digits(DigitValue),
    Bits(BitString),
}

/// A joint assignment of node values, with the noise draws that produced it
/// when it came from the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: IndexMap<String, Value>,
    pub noise: Option<IndexMap<String, Noise>>,
}

impl Observation {
    pub fn value(&self, id: &str) -> Option<&Value> {
        self.values.get(id)
    }
}

/// Draw the mechanism's noise term.
fn draw_noise(mechanism: &MechanismSpec, rng: &mut ChaCha8Rng) -> Option<Noise> {
    match mechanism {
        MechanismSpec::LinearGaussian { noise_sd, .. } => {
            let z: f64 = StandardNormal.sample(rng);
            Some(Noise::Real(noise_sd * z))
        }
        MechanismSpec::UniformDigits { digits } => {
            let units = rng.gen_range(0..10u64.pow(*digits));
            Some(Noise::Digits(DigitValue::from_units(units, *digits)))
        }
        MechanismSpec::XorConst { constant } => {
            // Only roots draw noise; X = N ⊕ constant with N uniform.
            Some(Noise::Bits(BitString::random(rng, constant.len_bits())))
        }
        MechanismSpec::Deterministic { .. } => None,
    }
}

/// Evaluate one node from its parents and noise.
fn eval_node(
    model: &CausalModel,
    idx: usize,
    parent_values: &[&Value],
    noise: Option<&Noise>,
) -> Result<Value, SampleError> {
    let node = model.node(idx);
    let type_err = |found: &'static str| SampleError::ParentType {
        node: node.id.clone(),
        mechanism: node.mechanism.kind_name(),
        found,
    };
    match &node.mechanism {
        MechanismSpec::LinearGaussian { coefficients, .. } => {
            let mut sum = match noise {
                Some(Noise::Real(n)) => *n,
                _ => 0.0,
            };
            for (coef, v) in coefficients.iter().zip(parent_values) {
                sum += coef * v.as_real().ok_or_else(|| type_err(v.kind_name()))?;
            }
            Ok(Value::Real(sum))
        }
        MechanismSpec::UniformDigits { digits } => {
            let mut sum = match noise {
                Some(Noise::Digits(d)) => *d,
                _ => DigitValue::zero(*digits),
            };
            for v in parent_values {
                let d = v.as_digits().ok_or_else(|| type_err(v.kind_name()))?;
                sum = sum.checked_add(d)?;
            }
            Ok(Value::Digits(sum))
        }
        MechanismSpec::XorConst { constant } => match parent_values {
            [] => {
                let Some(Noise::Bits(n)) = noise else {
                    return Err(SampleError::MissingProvenance);
                };
                Ok(Value::Bits(n.xor(constant)?))
            }
            [parent] => {
                let bits = parent.as_bits().ok_or_else(|| type_err(parent.kind_name()))?;
                Ok(Value::Bits(bits.xor(constant)?))
            }
            more => Err(SampleError::ParentArity {
                node: node.id.clone(),
                expected: 1,
                got: more.len(),
            }),
        },
        MechanismSpec::Deterministic { map } => eval_deterministic(map, node, parent_values),
    }
}

fn eval_deterministic(
    map: &str,
    node: &super::model::NodeSpec,
    parents: &[&Value],
) -> Result<Value, SampleError> {
    let type_err = |found: &'static str| SampleError::ParentType {
        node: node.id.clone(),
        mechanism: "deterministic",
        found,
    };
    match map {
        "identity" => Ok((*parents[0]).clone()),
        "negate" => {
            let x = parents[0].as_real().ok_or_else(|| type_err(parents[0].kind_name()))?;
            Ok(Value::Real(-x))
        }
        "sum" => {
            let mut s = 0.0;
            for v in parents {
                s += v.as_real().ok_or_else(|| type_err(v.kind_name()))?;
            }
            Ok(Value::Real(s))
        }
        other => unreachable!("unvalidated deterministic map {other}"),
    }
}

/// Recompute all node values in topological order from a full noise record.
fn propagate(
    model: &CausalModel,
    noise: &IndexMap<String, Noise>,
) -> Result<IndexMap<String, Value>, SampleError> {
    let mut values: IndexMap<String, Value> = IndexMap::with_capacity(model.len());
    for &idx in model.topological_order() {
        let node = model.node(idx);
        let parent_values: Vec<&Value> = model
            .parent_indices(idx)
            .iter()
            .map(|&p| &values[model.node(p).id.as_str()])
            .collect();
        let value = eval_node(model, idx, &parent_values, noise.get(&node.id))?;
        values.insert(node.id.clone(), value);
    }
    Ok(values)
}

/// Ancestral sampling: `count` observations, deterministic for a fixed seed,
/// each carrying its per-node noise record.
pub fn sample(model: &CausalModel, seed: u64, count: usize) -> Result<Vec<Observation>, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut noise: IndexMap<String, Noise> = IndexMap::new();
        for &idx in model.topological_order() {
            let node = model.node(idx);
            if let Some(n) = draw_noise(&node.mechanism, &mut rng) {
                noise.insert(node.id.clone(), n);
            }
        }
        let values = propagate(model, &noise)?;
        out.push(Observation {
            values,
            noise: Some(noise),
        });
    }
    Ok(out)
}

/// How to override a node's noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnomalySpec {
    /// Replace a linear-Gaussian node's noise with a fixed value.
    SetNoise(f64),
    /// Replace a uniform-digits node's noise with `digit/10`
    /// (fraction string `D00…0`).
    OneDigitNoise(u8),
}

impl AnomalySpec {
    fn name(&self) -> &'static str {
        match self {
            AnomalySpec::SetNoise(_) => "set_noise",
            AnomalySpec::OneDigitNoise(_) => "one_digit_noise",
        }
    }
}

/// Override `node`'s noise in `base` and re-propagate its descendants
/// through the unchanged mechanisms. The base observation must carry noise
/// provenance (i.e. come from [`sample`]).
pub fn inject_anomaly(
    model: &CausalModel,
    base: &Observation,
    node: &str,
    spec: AnomalySpec,
) -> Result<Observation, SampleError> {
    let idx = model
        .node_index(node)
        .ok_or_else(|| SampleError::UnknownNode(node.to_string()))?;
    let mut noise = base
        .noise
        .clone()
        .ok_or(SampleError::MissingProvenance)?;
    let mechanism = &model.node(idx).mechanism;
    let mismatch = || SampleError::SpecMismatch {
        spec: spec.name(),
        node: node.to_string(),
        mechanism: mechanism.kind_name(),
    };
    let new_noise = match (&spec, mechanism) {
        (AnomalySpec::SetNoise(v), MechanismSpec::LinearGaussian { .. }) => Noise::Real(*v),
        (AnomalySpec::OneDigitNoise(d), MechanismSpec::UniformDigits { digits }) => {
            if *d > 9 {
                return Err(SampleError::BadDigit(*d));
            }
            Noise::Digits(DigitValue::from_units(
                u64::from(*d) * 10u64.pow(digits - 1),
                *digits,
            ))
        }
        _ => return Err(mismatch()),
    };
    noise.insert(node.to_string(), new_noise);
    let values = propagate(model, &noise)?;
    Ok(Observation {
        values,
        noise: Some(noise),
    })
}

/// Sample a single observation with `seed`, then inject the anomaly.
pub fn inject_anomaly_seeded(
    model: &CausalModel,
    seed: u64,
    node: &str,
    spec: AnomalySpec,
) -> Result<Observation, SampleError> {
    let base = sample(model, seed, 1)?.remove(0);
    inject_anomaly(model, &base, node, spec)
}
