use crate::error::{Error, Result};
use crate::exposures::{ExposureSpec, ExposureValue, UnitExposure};
use crate::mechanisms::{conditional_law, Distribution, Mechanism};
use crate::netcore::{EnumerationCap, Network, UnitSet};
use crate::outcomes::{ContextSet, PotentialOutcomes};

/// The exposure contrast `tau(t, t')` over a subpopulation.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimandSpec {
    pub exposure: ExposureSpec,
    pub t: ExposureValue,
    pub t_prime: ExposureValue,
    pub subpop: UnitSet,
}

impl EstimandSpec {
    pub fn new(exposure: ExposureSpec, t: ExposureValue, t_prime: ExposureValue, subpop: UnitSet) -> Result<Self> {
        if t == t_prime {
            return Err(Error::Precondition(format!("t and t' are both {t}")));
        }
        if subpop.is_empty() {
            return Err(Error::EmptySubpopulation);
        }
        for v in [&t, &t_prime] {
            if !exposure.accepts(v) {
                return Err(Error::Precondition(format!(
                    "{v} is not a value of the {exposure} exposure"
                )));
            }
        }
        Ok(EstimandSpec {
            exposure,
            t,
            t_prime,
            subpop,
        })
    }
}

/// Everything an exact evaluation needs, borrowed.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub net: &'a Network,
    pub contexts: &'a ContextSet,
    pub outcomes: &'a dyn PotentialOutcomes,
    pub mechanism: &'a Mechanism,
    pub spec: &'a EstimandSpec,
    pub cap: EnumerationCap,
}

impl<'a> Problem<'a> {
    pub fn new(
        net: &'a Network,
        contexts: &'a ContextSet,
        outcomes: &'a dyn PotentialOutcomes,
        mechanism: &'a Mechanism,
        spec: &'a EstimandSpec,
    ) -> Result<Self> {
        let n = net.n();
        for other in [outcomes.n(), mechanism.n()] {
            if other != n {
                return Err(Error::SizeMismatch { left: n, right: other });
            }
        }
        if mechanism.contexts() != contexts.len() {
            return Err(Error::SizeMismatch {
                left: contexts.len(),
                right: mechanism.contexts(),
            });
        }
        if !spec.subpop.is_subset(net.units()) {
            return Err(Error::Precondition(format!("subpopulation {} exceeds the network", spec.subpop)));
        }
        Ok(Problem {
            net,
            contexts,
            outcomes,
            mechanism,
            spec,
            cap: EnumerationCap::MAX,
        })
    }

    pub fn with_cap(mut self, cap: EnumerationCap) -> Self {
        self.cap = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub(crate) fn check_cap(&self) -> Result<()> {
        self.cap.check(self.n())
    }

    pub(crate) fn unit_exposure(&self, i: usize) -> UnitExposure {
        self.spec.exposure.for_unit(self.net, i)
    }

    /// `P(D = . | T_i = s, c)`.
    pub(crate) fn conditional(&self, ue: &UnitExposure, c: usize, s: &ExposureValue) -> Result<Distribution> {
        conditional_law(self.mechanism.law(c), ue, s, &self.contexts.get(c).id)
    }
}
