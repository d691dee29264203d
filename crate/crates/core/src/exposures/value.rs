use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

/// Labelled-isomorphism class of a neighborhood relative to the two
/// reference configurations of a subnetwork exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IsoClass {
    /// Matches the target configuration `(delta, a)`; rendered `1`.
    Target,
    /// Matches the baseline configuration `(delta', a)`; rendered `0`.
    Baseline,
    Other,
}

/// A realized exposure `T_i`.
///
/// Codomain by kind: DIM gives `Treatment`; any-treated-neighbor gives
/// `(d_i, indicator)`; neighbor count gives `(d_i, count)`; subnetwork
/// exposure gives an [`IsoClass`]; fraction treated gives an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExposureValue {
    Treatment(bool),
    AnyNeighbor { own: bool, any: bool },
    Count { own: bool, count: u32 },
    Iso(IsoClass),
    Fraction(Ratio<u32>),
}

impl ExposureValue {
    pub fn fraction(treated: u32, n: u32) -> Self {
        ExposureValue::Fraction(Ratio::new(treated, n))
    }
}

impl fmt::Display for ExposureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |x: bool| u8::from(x);
        match *self {
            ExposureValue::Treatment(d) => write!(f, "{}", b(d)),
            ExposureValue::AnyNeighbor { own, any } => write!(f, "({},{})", b(own), b(any)),
            ExposureValue::Count { own, count } => write!(f, "({},{})", b(own), count),
            ExposureValue::Iso(IsoClass::Target) => f.write_str("1"),
            ExposureValue::Iso(IsoClass::Baseline) => f.write_str("0"),
            ExposureValue::Iso(IsoClass::Other) => f.write_str("other"),
            ExposureValue::Fraction(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for ExposureValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub(crate) fn parse_bit(s: &str) -> Option<bool> {
    match s.trim() {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

/// Splits `"(a,b)"` into its two trimmed components.
pub(crate) fn parse_pair(s: &str) -> Option<(&str, &str)> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim(), b.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_report_strings() {
        assert_eq!(ExposureValue::Count { own: true, count: 2 }.to_string(), "(1,2)");
        assert_eq!(ExposureValue::AnyNeighbor { own: false, any: true }.to_string(), "(0,1)");
        assert_eq!(ExposureValue::fraction(3, 4).to_string(), "3/4");
        assert_eq!(ExposureValue::fraction(2, 4).to_string(), "1/2");
        assert_eq!(ExposureValue::Iso(IsoClass::Other).to_string(), "other");
    }

    #[test]
    fn fractions_compare_reduced() {
        assert_eq!(ExposureValue::fraction(2, 4), ExposureValue::fraction(1, 2));
    }
}
