//! Exposure mappings, subpopulation rules and the pin-down check.

mod value;

pub use value::{ExposureValue, IsoClass};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netcore::{
    labeled_isomorphic_anchored, Assignment, EnumerationCap, Network, SubWord, UnitSet,
    ISOMORPHISM_CAP,
};

/// Reference configurations `(delta, a)` and `(delta', a)` of a subnetwork
/// exposure. Both share the subnetwork `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoReference {
    pub radius: usize,
    pub graph: Network,
    pub target: SubWord,
    pub baseline: SubWord,
    /// When set, isomorphisms must map the ego onto this reference unit.
    pub ego: Option<usize>,
}

impl IsoReference {
    pub fn new(
        radius: usize,
        graph: Network,
        target: SubWord,
        baseline: SubWord,
        ego: Option<usize>,
    ) -> Result<Self> {
        let m = graph.n();
        if m > ISOMORPHISM_CAP {
            return Err(Error::IsomorphismCap {
                m,
                cap: ISOMORPHISM_CAP,
            });
        }
        if target.len() != m || baseline.len() != m {
            return Err(Error::SizeMismatch {
                left: m,
                right: if target.len() != m { target.len() } else { baseline.len() },
            });
        }
        if ego.is_some_and(|e| e >= m) {
            return Err(Error::Precondition("reference ego outside the subnetwork".into()));
        }
        Ok(IsoReference {
            radius,
            graph,
            target,
            baseline,
            ego,
        })
    }

    fn matches(&self, sub: &Network, labels: SubWord, reference: SubWord, ego_pos: usize) -> bool {
        let anchor = self.ego.map(|e| (ego_pos, e));
        matches!(
            labeled_isomorphic_anchored(sub, labels, &self.graph, reference, anchor),
            Ok(Some(_))
        )
    }

    fn matches_graph(&self, sub: &Network, ego_pos: usize) -> bool {
        let m = self.graph.n();
        let zero = SubWord::new(0, m);
        sub.n() == m && self.matches(sub, zero, zero, ego_pos)
    }
}

/// The exposure mapping `T_i = f(i, D)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExposureSpec {
    /// `T_i = d_i`.
    Dim,
    /// `T_i = (d_i, 1{any neighbor treated})`.
    AnyTreatedNeighbor,
    /// `T_i = (d_i, number of treated neighbors)`.
    NeighborCount,
    /// `T_i` is the isomorphism class of the labelled `K`-neighborhood.
    SubnetworkIso(IsoReference),
    /// `T_i` is the overall fraction of treated units.
    FractionTreated,
}

impl ExposureSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ExposureSpec::Dim => "dim",
            ExposureSpec::AnyTreatedNeighbor => "any_treated_neighbor",
            ExposureSpec::NeighborCount => "neighbor_count",
            ExposureSpec::SubnetworkIso(_) => "subnetwork_iso",
            ExposureSpec::FractionTreated => "fraction_treated",
        }
    }

    /// Neighborhood radius `K` implied by the kind. The fraction-treated
    /// mapping depends on every unit; its radius is the diameter.
    pub fn radius(&self, net: &Network) -> usize {
        match self {
            ExposureSpec::Dim => 0,
            ExposureSpec::AnyTreatedNeighbor | ExposureSpec::NeighborCount => 1,
            ExposureSpec::SubnetworkIso(r) => r.radius,
            ExposureSpec::FractionTreated => net.diameter(),
        }
    }

    /// The units the exposure of `i` may depend on. For the
    /// fraction-treated mapping this is every unit, even on a
    /// disconnected network.
    pub fn neighborhood(&self, net: &Network, i: usize) -> UnitSet {
        match self {
            ExposureSpec::FractionTreated => net.units(),
            _ => net.neighborhood(i, self.radius(net)),
        }
    }

    /// Evaluates `f(i, d)`.
    pub fn value(&self, net: &Network, i: usize, d: Assignment) -> ExposureValue {
        let own = d.get(i);
        match self {
            ExposureSpec::Dim => ExposureValue::Treatment(own),
            ExposureSpec::AnyTreatedNeighbor => ExposureValue::AnyNeighbor {
                own,
                any: d.bits() & net.row(i) != 0,
            },
            ExposureSpec::NeighborCount => ExposureValue::Count {
                own,
                count: (d.bits() & net.row(i)).count_ones(),
            },
            ExposureSpec::FractionTreated => {
                ExposureValue::fraction(d.count() as u32, net.n() as u32)
            }
            ExposureSpec::SubnetworkIso(r) => {
                let nbhd = net.neighborhood(i, r.radius);
                ExposureValue::Iso(iso_class(r, net, nbhd, i, d))
            }
        }
    }

    /// Precomputes what evaluating the exposure of one unit needs.
    pub fn for_unit(&self, net: &Network, i: usize) -> UnitExposure {
        let nbhd = self.neighborhood(net, i);
        let table = match self {
            ExposureSpec::SubnetworkIso(r) => {
                let size = nbhd.len();
                if size == r.graph.n() {
                    let sub = net.induced(nbhd);
                    let ego_pos = nbhd.iter().position(|u| u == i).unwrap_or(0);
                    let classes = (0..1u32 << size)
                        .map(|bits| {
                            let labels = SubWord::new(bits, size);
                            if r.matches(&sub, labels, r.target, ego_pos) {
                                IsoClass::Target
                            } else if r.matches(&sub, labels, r.baseline, ego_pos) {
                                IsoClass::Baseline
                            } else {
                                IsoClass::Other
                            }
                        })
                        .collect();
                    Some(classes)
                } else {
                    Some(Vec::new())
                }
            }
            _ => None,
        };
        UnitExposure {
            spec: self.clone(),
            unit: i,
            nbhd,
            row: net.row(i),
            n: net.n(),
            iso_table: table,
        }
    }

    /// Parses an exposure value as rendered in reports, e.g. `"(1,2)"` or
    /// `"3/4"`.
    pub fn parse_value(&self, s: &str) -> Option<ExposureValue> {
        let s = s.trim();
        match self {
            ExposureSpec::Dim => value::parse_bit(s).map(ExposureValue::Treatment),
            ExposureSpec::AnyTreatedNeighbor => {
                let (a, b) = value::parse_pair(s)?;
                Some(ExposureValue::AnyNeighbor {
                    own: value::parse_bit(a)?,
                    any: value::parse_bit(b)?,
                })
            }
            ExposureSpec::NeighborCount => {
                let (a, b) = value::parse_pair(s)?;
                Some(ExposureValue::Count {
                    own: value::parse_bit(a)?,
                    count: b.parse().ok()?,
                })
            }
            ExposureSpec::SubnetworkIso(_) => match s {
                "1" => Some(ExposureValue::Iso(IsoClass::Target)),
                "0" => Some(ExposureValue::Iso(IsoClass::Baseline)),
                _ => None,
            },
            ExposureSpec::FractionTreated => {
                let r: num_rational::Ratio<u32> = s.parse().ok()?;
                Some(ExposureValue::Fraction(r))
            }
        }
    }

    /// Whether `v` belongs to this kind's codomain.
    pub fn accepts(&self, v: &ExposureValue) -> bool {
        matches!(
            (self, v),
            (ExposureSpec::Dim, ExposureValue::Treatment(_))
                | (ExposureSpec::AnyTreatedNeighbor, ExposureValue::AnyNeighbor { .. })
                | (ExposureSpec::NeighborCount, ExposureValue::Count { .. })
                | (ExposureSpec::SubnetworkIso(_), ExposureValue::Iso(_))
                | (ExposureSpec::FractionTreated, ExposureValue::Fraction(_))
        )
    }
}

impl fmt::Display for ExposureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind_name())
    }
}

fn iso_class(r: &IsoReference, net: &Network, nbhd: UnitSet, i: usize, d: Assignment) -> IsoClass {
    if nbhd.len() != r.graph.n() {
        return IsoClass::Other;
    }
    let sub = net.induced(nbhd);
    let labels = d.project(nbhd);
    let ego_pos = nbhd.iter().position(|u| u == i).unwrap_or(0);
    if r.matches(&sub, labels, r.target, ego_pos) {
        IsoClass::Target
    } else if r.matches(&sub, labels, r.baseline, ego_pos) {
        IsoClass::Baseline
    } else {
        IsoClass::Other
    }
}

/// Exposure of a single unit with its neighborhood and, for subnetwork
/// exposures, a lookup table over neighborhood patterns.
#[derive(Debug, Clone)]
pub struct UnitExposure {
    spec: ExposureSpec,
    unit: usize,
    nbhd: UnitSet,
    row: u32,
    n: usize,
    iso_table: Option<Vec<IsoClass>>,
}

impl UnitExposure {
    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn neighborhood(&self) -> UnitSet {
        self.nbhd
    }

    pub fn value(&self, d: Assignment) -> ExposureValue {
        let own = d.get(self.unit);
        match &self.spec {
            ExposureSpec::Dim => ExposureValue::Treatment(own),
            ExposureSpec::AnyTreatedNeighbor => ExposureValue::AnyNeighbor {
                own,
                any: d.bits() & self.row != 0,
            },
            ExposureSpec::NeighborCount => ExposureValue::Count {
                own,
                count: (d.bits() & self.row).count_ones(),
            },
            ExposureSpec::FractionTreated => {
                ExposureValue::fraction(d.count() as u32, self.n as u32)
            }
            ExposureSpec::SubnetworkIso(_) => {
                let table = self.iso_table.as_deref().unwrap_or(&[]);
                if table.is_empty() {
                    ExposureValue::Iso(IsoClass::Other)
                } else {
                    ExposureValue::Iso(table[d.project(self.nbhd).bits() as usize])
                }
            }
        }
    }

    /// Neighborhood patterns (as full-width masks supported on the
    /// neighborhood) whose exposure equals `t`, in increasing order.
    pub fn patterns_attaining(&self, t: &ExposureValue) -> Vec<u32> {
        self.nbhd
            .submasks()
            .filter(|&x| self.value(Assignment::new(x, self.n)) == *t)
            .collect()
    }
}

/// Rule selecting the subpopulation `M_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", content = "param", rename_all = "snake_case")]
pub enum SubpopulationRule {
    All,
    AtLeastOneNeighbor,
    /// Units with exactly this many neighbors.
    Degree(usize),
    /// Units whose neighborhood subnetwork is isomorphic to the reference.
    IsoClass,
    Explicit(UnitSet),
}

/// Resolved subpopulation plus a warning when it is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Subpopulation {
    pub units: UnitSet,
    pub warning: Option<String>,
}

/// Resolves `M_n` for the exposure. `Explicit` is accepted for every kind;
/// the other rules must suit the kind.
pub fn subpopulation(f: &ExposureSpec, net: &Network, rule: &SubpopulationRule) -> Result<Subpopulation> {
    let n = net.n();
    let units = match (rule, f) {
        (SubpopulationRule::All, _) => net.units(),
        (SubpopulationRule::Explicit(s), _) => {
            if !s.is_subset(net.units()) {
                return Err(Error::Precondition(format!("subpopulation {s} has units outside 1..={n}")));
            }
            *s
        }
        (
            SubpopulationRule::AtLeastOneNeighbor,
            ExposureSpec::AnyTreatedNeighbor | ExposureSpec::NeighborCount,
        ) => (0..n).filter(|&i| net.degree(i) >= 1).collect(),
        (SubpopulationRule::Degree(g), ExposureSpec::NeighborCount | ExposureSpec::AnyTreatedNeighbor) => {
            (0..n).filter(|&i| net.degree(i) == *g).collect()
        }
        (SubpopulationRule::IsoClass, ExposureSpec::SubnetworkIso(r)) => (0..n)
            .filter(|&i| {
                let nbhd = net.neighborhood(i, r.radius);
                let ego_pos = nbhd.iter().position(|u| u == i).unwrap_or(0);
                r.matches_graph(&net.induced(nbhd), ego_pos)
            })
            .collect(),
        (rule, f) => {
            return Err(Error::Precondition(format!(
                "subpopulation rule {rule:?} does not apply to exposure {f}"
            )))
        }
    };
    let warning = units
        .is_empty()
        .then(|| "subpopulation is empty; the estimand is undefined".to_string());
    Ok(Subpopulation { units, warning })
}

/// Default subpopulation rule for each kind; the neighbor count needs
/// the degree `gamma`.
pub fn default_rule(f: &ExposureSpec, gamma: Option<usize>) -> SubpopulationRule {
    match f {
        ExposureSpec::Dim | ExposureSpec::FractionTreated => SubpopulationRule::All,
        ExposureSpec::AnyTreatedNeighbor => SubpopulationRule::AtLeastOneNeighbor,
        ExposureSpec::NeighborCount => match gamma {
            Some(g) => SubpopulationRule::Degree(g),
            None => SubpopulationRule::AtLeastOneNeighbor,
        },
        ExposureSpec::SubnetworkIso(_) => SubpopulationRule::IsoClass,
    }
}

/// Result of the pin-down check for one unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pindown {
    /// Exactly one neighborhood pattern attains the value.
    Holds { delta: SubWord },
    /// Two distinct patterns attain the value.
    Fails { first: SubWord, second: SubWord },
    /// No pattern attains the value at all.
    FailsEmpty,
}

impl Pindown {
    pub fn holds(&self) -> bool {
        matches!(self, Pindown::Holds { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Pindown::Holds { .. } => "HOLDS",
            Pindown::Fails { .. } => "FAILS",
            Pindown::FailsEmpty => "FAILS_EMPTY",
        }
    }
}

/// Checks whether `T_i = t_prime` determines the whole neighborhood
/// subvector `d_{N(i,K)}`.
pub fn check_pindown(
    f: &ExposureSpec,
    net: &Network,
    i: usize,
    t_prime: &ExposureValue,
    cap: EnumerationCap,
) -> Result<Pindown> {
    cap.check(net.n())?;
    let ue = f.for_unit(net, i);
    let nbhd = ue.neighborhood();
    let hits = ue.patterns_attaining(t_prime);
    let project = |x: u32| Assignment::new(x, net.n()).project(nbhd);
    Ok(match hits.as_slice() {
        [] => Pindown::FailsEmpty,
        [only] => Pindown::Holds {
            delta: project(*only),
        },
        [a, b, ..] => Pindown::Fails {
            first: project(*a),
            second: project(*b),
        },
    })
}
