use std::fmt;

use serde::{Serialize, Serializer};

/// Hard ceiling on the number of units a bit word can carry.
pub const MAX_UNITS: usize = 24;

/// A set of units stored as a bit mask; bit `i` is unit `i` (0-based).
///
/// Iteration is always in ascending unit order, which is the canonical
/// order used when projecting assignments onto the set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UnitSet(u32);

impl UnitSet {
    pub const EMPTY: UnitSet = UnitSet(0);

    pub fn from_mask(mask: u32) -> Self {
        UnitSet(mask)
    }

    /// All units `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_UNITS);
        UnitSet(low_mask(n))
    }

    pub fn singleton(i: usize) -> Self {
        UnitSet(1 << i)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn union(self, other: UnitSet) -> UnitSet {
        UnitSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: UnitSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Units of `0..n` not in the set.
    pub fn complement(self, n: usize) -> UnitSet {
        UnitSet(!self.0 & low_mask(n))
    }

    pub fn iter(self) -> UnitIter {
        UnitIter(self.0)
    }

    /// Every subset of this set as a mask (including the empty set), in
    /// increasing numeric order.
    pub fn submasks(self) -> SubmaskIter {
        SubmaskIter {
            mask: self.0,
            next: Some(0),
        }
    }

    /// 1-based unit labels, as written in scenario files.
    pub fn external(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl FromIterator<usize> for UnitSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut set = UnitSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

impl fmt::Debug for UnitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for UnitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

impl Serialize for UnitSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.external().serialize(serializer)
    }
}

pub struct UnitIter(u32);

impl Iterator for UnitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for UnitIter {}

pub struct SubmaskIter {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for SubmaskIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some(cur.wrapping_sub(self.mask) & self.mask)
        };
        Some(cur)
    }
}

/// A treatment assignment vector in `{0,1}^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bits: u32,
    n: u8,
}

impl Assignment {
    pub fn new(bits: u32, n: usize) -> Self {
        debug_assert!(n <= MAX_UNITS);
        debug_assert_eq!(bits & !low_mask(n), 0, "bits outside 0..n");
        Assignment { bits, n: n as u8 }
    }

    pub fn zeros(n: usize) -> Self {
        Assignment::new(0, n)
    }

    pub fn ones(n: usize) -> Self {
        Assignment::new(low_mask(n), n)
    }

    /// Every vector of `{0,1}^n` in increasing numeric order.
    pub fn all(n: usize) -> impl Iterator<Item = Assignment> {
        (0..1u32 << n).map(move |bits| Assignment::new(bits, n))
    }

    pub fn from_units(n: usize, treated: UnitSet) -> Self {
        Assignment::new(treated.mask(), n)
    }

    /// Parses a bit string such as `"101"`; character `k` is unit `k+1`.
    pub fn parse(s: &str) -> Option<Assignment> {
        let n = s.len();
        if n == 0 || n > MAX_UNITS {
            return None;
        }
        let mut bits = 0u32;
        for (k, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << k,
                _ => return None,
            }
        }
        Some(Assignment::new(bits, n))
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn get(self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn with(self, i: usize, value: bool) -> Self {
        let bits = if value {
            self.bits | 1 << i
        } else {
            self.bits & !(1 << i)
        };
        Assignment { bits, n: self.n }
    }

    pub fn treated(self) -> UnitSet {
        UnitSet::from_mask(self.bits)
    }

    pub fn count(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Number of treated units inside `set`.
    pub fn count_in(self, set: UnitSet) -> usize {
        (self.bits & set.mask()).count_ones() as usize
    }

    /// Componentwise `self >= other`.
    pub fn dominates(self, other: Assignment) -> bool {
        other.bits & !self.bits == 0
    }

    /// Keeps the bits of `set`, zeroing every other unit.
    pub fn masked(self, set: UnitSet) -> Assignment {
        Assignment {
            bits: self.bits & set.mask(),
            n: self.n,
        }
    }

    /// Partitions the vector into its projections on `set` and on the
    /// complement of `set`, each in canonical unit order.
    pub fn split(self, set: UnitSet) -> (SubWord, SubWord) {
        let outside = set.complement(self.n());
        (self.project(set), self.project(outside))
    }

    /// Bits of the units in `set`, compacted in ascending unit order.
    pub fn project(self, set: UnitSet) -> SubWord {
        let mut bits = 0u32;
        for (k, i) in set.iter().enumerate() {
            if self.get(i) {
                bits |= 1 << k;
            }
        }
        SubWord::new(bits, set.len())
    }

    /// Inverse of [`Assignment::split`].
    pub fn recombine(n: usize, set: UnitSet, inside: SubWord, outside: SubWord) -> Assignment {
        debug_assert_eq!(inside.len(), set.len());
        let rest = set.complement(n);
        debug_assert_eq!(outside.len(), rest.len());
        Assignment::new(inside.embed(set) | outside.embed(rest), n)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({self})")
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A binary word of fixed length: the projection of an assignment on a
/// unit set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubWord {
    bits: u32,
    len: u8,
}

impl SubWord {
    pub fn new(bits: u32, len: usize) -> Self {
        debug_assert!(len <= 32);
        debug_assert_eq!(bits & !low_mask(len), 0);
        SubWord {
            bits,
            len: len as u8,
        }
    }

    pub fn parse(s: &str) -> Option<SubWord> {
        Assignment::parse(s).map(|a| SubWord::new(a.bits(), a.n()))
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn get(self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    pub fn count(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Scatters the word back onto the units of `set`.
    pub fn embed(self, set: UnitSet) -> u32 {
        let mut out = 0u32;
        for (k, i) in set.iter().enumerate() {
            if self.get(k) {
                out |= 1 << i;
            }
        }
        out
    }
}

impl fmt::Display for SubWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.get(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SubWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubWord({self})")
    }
}

impl Serialize for SubWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub(crate) fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}
