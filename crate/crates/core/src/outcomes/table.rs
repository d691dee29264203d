use std::collections::HashMap;

use super::PotentialOutcomes;
use crate::error::{Error, Result};
use crate::netcore::Assignment;

/// Sparse table of conditional-mean outcomes `E[Y_i(d) | c]` with an
/// optional default for cells that are not listed.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    n: usize,
    contexts: usize,
    cells: HashMap<(usize, usize, u32), f64>,
    default: Option<f64>,
}

impl OutcomeTable {
    pub fn new(n: usize, contexts: usize, default: Option<f64>) -> Self {
        OutcomeTable {
            n,
            contexts,
            cells: HashMap::new(),
            default,
        }
    }

    /// Fills every cell from `f(context, unit, d)`.
    pub fn from_fn(n: usize, contexts: usize, mut f: impl FnMut(usize, usize, Assignment) -> f64) -> Self {
        let mut table = OutcomeTable::new(n, contexts, None);
        for c in 0..contexts {
            for i in 0..n {
                for d in Assignment::all(n) {
                    table.cells.insert((c, i, d.bits()), f(c, i, d));
                }
            }
        }
        table
    }

    pub fn set(&mut self, context: usize, unit: usize, d: Assignment, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Precondition(format!(
                "outcome for unit {} at {d} is not finite",
                unit + 1
            )));
        }
        if context >= self.contexts || unit >= self.n || d.n() != self.n {
            return Err(Error::Precondition(format!(
                "outcome cell (context {context}, unit {}, {d}) is out of range",
                unit + 1
            )));
        }
        self.cells.insert((context, unit, d.bits()), value);
        Ok(())
    }

    pub fn default_value(&self) -> Option<f64> {
        self.default
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }

    pub fn stored_cells(&self) -> usize {
        self.cells.len()
    }
}

impl PotentialOutcomes for OutcomeTable {
    fn n(&self) -> usize {
        self.n
    }

    fn mean_outcome(&self, context: usize, unit: usize, d: Assignment) -> Result<f64> {
        match self.cells.get(&(context, unit, d.bits())) {
            Some(&v) => Ok(v),
            None => self.default.ok_or_else(|| Error::MissingCell {
                context: context.to_string(),
                unit: unit + 1,
                assignment: d.to_string(),
            }),
        }
    }
}
