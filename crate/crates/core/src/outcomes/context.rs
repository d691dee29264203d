use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance for exact identities on unit-scale quantities.
pub const EXACT_TOL: f64 = 1e-12;

/// One realization of the conditioning variables, carrying its own
/// outcome-noise state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Context {
    pub id: String,
    pub weight: f64,
    /// Discrete per-unit observables. Contexts with equal covariates differ
    /// only in their outcome-noise state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariates: Option<Vec<i64>>,
}

impl Context {
    pub fn new(id: impl Into<String>, weight: f64) -> Self {
        Context {
            id: id.into(),
            weight,
            covariates: None,
        }
    }

    pub fn with_covariates(mut self, covariates: Vec<i64>) -> Self {
        self.covariates = Some(covariates);
        self
    }
}

/// Weighted set of contexts; weights are non-negative and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ContextSet {
    contexts: Vec<Context>,
}

impl ContextSet {
    pub fn new(contexts: Vec<Context>) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::Precondition("context set is empty".into()));
        }
        for c in &contexts {
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::Precondition(format!(
                    "context {} has invalid weight {}",
                    c.id, c.weight
                )));
            }
        }
        let total: f64 = contexts.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::Precondition(format!(
                "context weights sum to {total}, expected 1"
            )));
        }
        let mut ids: Vec<&str> = contexts.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("duplicate context id".into()));
        }
        Ok(ContextSet { contexts })
    }

    /// A single context with unit weight.
    pub fn single() -> Self {
        ContextSet {
            contexts: vec![Context::new("c", 1.0)],
        }
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn get(&self, c: usize) -> &Context {
        &self.contexts[c]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Context> {
        self.contexts.iter()
    }

    /// Indices of contexts with positive weight.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.contexts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.weight > 0.0)
            .map(|(k, _)| k)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.id == id)
    }
}
