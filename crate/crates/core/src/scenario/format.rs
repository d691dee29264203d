//! The `.scn` scenario format: TOML with explicit keys, 1-based units and
//! assignment vectors as bit strings in unit order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_outcome: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contexts: Vec<RawContext>,
    pub exposure: RawExposure,
    pub estimand: RawEstimand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural: Option<RawStructural>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<RawMechanism>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mechanisms: Vec<RawMechanism>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<RawOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawContext {
    pub id: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariates: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExposure {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own_treatment: Option<bool>,
    #[serde(rename = "K", alias = "k", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<RawReference>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawReference {
    pub n: usize,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
    pub target: String,
    pub baseline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEstimand {
    pub t: String,
    pub t_prime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subpopulation: Option<RawSubpopulation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawSubpopulation {
    /// `"all"`, `"at_least_one_neighbor"` or `"iso_class"`.
    Named(String),
    Units(Vec<usize>),
    Degree { degree: usize },
}

/// Either one cell (`unit` and `value`) or a whole row of outcomes for
/// every unit (`values`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub assignment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStructural {
    /// `"distance_decay"` or `"local_count"`.
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMechanism {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treated: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<RawProbabilities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<RawRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<RawTypes>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawProbabilities {
    Shared(f64),
    PerUnit(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRow {
    pub assignment: String,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawType {
    pub nu: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawTypes {
    PerUnit(Vec<Vec<RawType>>),
    Shared(Vec<RawType>),
}
