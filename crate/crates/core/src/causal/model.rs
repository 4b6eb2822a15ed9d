//! Causal model representation, validation, and topological ordering.
//!
//! Models serialize to JSON documents of the form
//! `{"nodes": [{"id", "parents", "mechanism": {"kind", …}}]}` with one of
//! four mechanism kinds: `linear_gaussian`, `uniform_digits`, `xor_const`,
//! `deterministic`. See `models/` in the repository for one example of each.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::value::BitString;

/// Registered named deterministic maps.
pub const DETERMINISTIC_MAPS: &[&str] = &["identity", "negate", "sum"];

/// Largest supported fraction width for uniform digit mechanisms; keeps sums
/// of a few hundred node values inside `u64` fixed-point arithmetic.
pub const MAX_DIGITS: u32 = 17;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate node id {0:?}")]
    DuplicateId(String),
    #[error("node {node:?} lists unknown parent {parent:?}")]
    UnknownParent { node: String, parent: String },
    #[error("parent relation has a cycle through nodes {0:?}")]
    Cycle(Vec<String>),
    #[error("node {node:?}: {reason}")]
    MechanismInvalid { node: String, reason: String },
    #[error("model has no nodes")]
    Empty,
    #[error("model JSON: {0}")]
    Json(String),
}

/// How a node's value is generated from its parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MechanismSpec {
    /// `X = Σ coefficients[i]·parent_i + N(0, noise_sd²)`; real-valued.
    LinearGaussian {
        coefficients: Vec<f64>,
        noise_sd: f64,
    },
    /// `X = Σ parent_i + U`, with `U` uniform over `[0, 1)` discretized to
    /// `digits` decimal digits; values are exact fixed-point decimals.
    UniformDigits { digits: u32 },
    /// Bit-string XOR with a fixed constant. With one parent the mechanism is
    /// deterministic (`X = parent ⊕ constant`); as a root it draws uniform
    /// noise bits (`X = N ⊕ constant`, i.e. the uniform distribution).
    XorConst { constant: BitString },
    /// A named deterministic map of the parent values (see
    /// [`DETERMINISTIC_MAPS`]).
    Deterministic { map: String },
}

impl MechanismSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MechanismSpec::LinearGaussian { .. } => "linear_gaussian",
            MechanismSpec::UniformDigits { .. } => "uniform_digits",
            MechanismSpec::XorConst { .. } => "xor_const",
            MechanismSpec::Deterministic { .. } => "deterministic",
        }
    }
}

/// One node declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub mechanism: MechanismSpec,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    nodes: Vec<NodeSpec>,
}

/// A validated causal DAG with one mechanism per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalModel {
    nodes: Vec<NodeSpec>,
    index: HashMap<String, usize>,
    parent_indices: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl CausalModel {
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Self, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut index = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(node.id.clone()));
            }
        }
        let mut parent_indices = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let mut idxs = Vec::with_capacity(node.parents.len());
            for p in &node.parents {
                let &pi = index.get(p).ok_or_else(|| ModelError::UnknownParent {
                    node: node.id.clone(),
                    parent: p.clone(),
                })?;
                idxs.push(pi);
            }
            parent_indices.push(idxs);
        }
        for node in &nodes {
            validate_mechanism(node)?;
        }
        let topo = toposort(&nodes, &parent_indices)?;
        Ok(Self {
            nodes,
            index,
            parent_indices,
            topo,
        })
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let doc: ModelDoc =
            serde_json::from_str(json).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::new(doc.nodes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDoc {
            nodes: self.nodes.clone(),
        })
        .expect("model serialization cannot fail")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, idx: usize) -> &NodeSpec {
        &self.nodes[idx]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn parent_indices(&self, idx: usize) -> &[usize] {
        &self.parent_indices[idx]
    }

    pub fn children_indices(&self, idx: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.parent_indices[c].contains(&idx))
            .collect()
    }

    /// Node indices in topological order; parents precede children, and ties
    /// break by declaration order, so the order is deterministic.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Node ids in topological order.
    pub fn topological_ids(&self) -> Vec<&str> {
        self.topo.iter().map(|&i| self.nodes[i].id.as_str()).collect()
    }
}

fn validate_mechanism(node: &NodeSpec) -> Result<(), ModelError> {
    let fail = |reason: String| ModelError::MechanismInvalid {
        node: node.id.clone(),
        reason,
    };
    match &node.mechanism {
        MechanismSpec::LinearGaussian {
            coefficients,
            noise_sd,
        } => {
            if coefficients.len() != node.parents.len() {
                return Err(fail(format!(
                    "{} coefficients for {} parents",
                    coefficients.len(),
                    node.parents.len()
                )));
            }
            if !coefficients.iter().all(|c| c.is_finite()) {
                return Err(fail("coefficients must be finite".into()));
            }
            if !(noise_sd.is_finite() && *noise_sd > 0.0) {
                return Err(fail(format!("noise_sd must be positive, got {noise_sd}")));
            }
        }
        MechanismSpec::UniformDigits { digits } => {
            if *digits == 0 || *digits > MAX_DIGITS {
                return Err(fail(format!(
                    "digits must be in 1..={MAX_DIGITS}, got {digits}"
                )));
            }
        }
        MechanismSpec::XorConst { constant } => {
            if constant.len_bits() == 0 {
                return Err(fail("xor constant must be nonempty".into()));
            }
            if node.parents.len() > 1 {
                return Err(fail(format!(
                    "xor_const takes at most one parent, got {}",
                    node.parents.len()
                )));
            }
        }
        MechanismSpec::Deterministic { map } => {
            if !DETERMINISTIC_MAPS.contains(&map.as_str()) {
                return Err(fail(format!(
                    "unknown deterministic map {map:?} (known: {DETERMINISTIC_MAPS:?})"
                )));
            }
            if map == "identity" && node.parents.len() != 1 {
                return Err(fail("identity takes exactly one parent".into()));
            }
            if map == "negate" && node.parents.len() != 1 {
                return Err(fail("negate takes exactly one parent".into()));
            }
        }
    }
    Ok(())
}

/// Kahn's algorithm, always picking the earliest declared ready node.
fn toposort(nodes: &[NodeSpec], parents: &[Vec<usize>]) -> Result<Vec<usize>, ModelError> {
    let n = nodes.len();
    let mut remaining_parents: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n).find(|&i| !placed[i] && remaining_parents[i] == 0);
        let Some(next) = next else {
            let stuck: Vec<String> = (0..n)
                .filter(|&i| !placed[i])
                .map(|i| nodes[i].id.clone())
                .collect();
            return Err(ModelError::Cycle(stuck));
        };
        placed[next] = true;
        order.push(next);
        for (child, ps) in parents.iter().enumerate() {
            if !placed[child] {
                remaining_parents[child] -= ps.iter().filter(|&&p| p == next).count();
            }
        }
    }
    Ok(order)
}
