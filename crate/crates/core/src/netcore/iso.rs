//! Brute-force isomorphism of small treatment-labelled subnetworks.
//!
//! A permutation `pi` witnesses `(treat_a, net_a) ~ (treat_b, net_b)` when
//! `treat_a[i] == treat_b[pi[i]]` and `net_a[i][j] == net_b[pi[i]][pi[j]]`
//! for all `i, j`. The search assigns `pi[0], pi[1], ...` in turn and
//! prunes candidates whose degree or label differ, or whose adjacency to
//! already-placed units disagrees.

use super::assignment::SubWord;
use super::network::Network;
use crate::error::{Error, Result};

/// Largest subnetwork the permutation search will accept.
pub const ISOMORPHISM_CAP: usize = 10;

pub type Permutation = Vec<usize>;

pub fn labeled_isomorphic(
    net_a: &Network,
    treat_a: SubWord,
    net_b: &Network,
    treat_b: SubWord,
) -> Result<Option<Permutation>> {
    labeled_isomorphic_anchored(net_a, treat_a, net_b, treat_b, None)
}

/// As [`labeled_isomorphic`], optionally forcing `pi[anchor.0] == anchor.1`.
pub fn labeled_isomorphic_anchored(
    net_a: &Network,
    treat_a: SubWord,
    net_b: &Network,
    treat_b: SubWord,
    anchor: Option<(usize, usize)>,
) -> Result<Option<Permutation>> {
    let m = net_a.n();
    if net_b.n() != m {
        return Err(Error::SizeMismatch {
            left: m,
            right: net_b.n(),
        });
    }
    if treat_a.len() != m || treat_b.len() != m {
        return Err(Error::SizeMismatch {
            left: treat_a.len(),
            right: treat_b.len(),
        });
    }
    if m > ISOMORPHISM_CAP {
        return Err(Error::IsomorphismCap {
            m,
            cap: ISOMORPHISM_CAP,
        });
    }
    // Cheap invariants first.
    if treat_a.count() != treat_b.count() {
        return Ok(None);
    }
    let mut deg_a: Vec<(usize, bool)> = (0..m).map(|i| (net_a.degree(i), treat_a.get(i))).collect();
    let mut deg_b: Vec<(usize, bool)> = (0..m).map(|i| (net_b.degree(i), treat_b.get(i))).collect();
    deg_a.sort_unstable();
    deg_b.sort_unstable();
    if deg_a != deg_b {
        return Ok(None);
    }

    let search = Search {
        net_a,
        treat_a,
        net_b,
        treat_b,
        anchor,
    };
    let mut pi = Vec::with_capacity(m);
    Ok(search.extend(&mut pi, 0).then_some(pi))
}

struct Search<'a> {
    net_a: &'a Network,
    treat_a: SubWord,
    net_b: &'a Network,
    treat_b: SubWord,
    anchor: Option<(usize, usize)>,
}

impl Search<'_> {
    fn compatible(&self, pi: &[usize], i: usize, j: usize) -> bool {
        if let Some((ai, bj)) = self.anchor {
            if (i == ai) != (j == bj) {
                return false;
            }
        }
        if self.treat_a.get(i) != self.treat_b.get(j) || self.net_a.degree(i) != self.net_b.degree(j) {
            return false;
        }
        pi.iter()
            .enumerate()
            .all(|(prev, &img)| self.net_a.is_linked(i, prev) == self.net_b.is_linked(j, img))
    }

    fn extend(&self, pi: &mut Vec<usize>, used: u32) -> bool {
        let i = pi.len();
        if i == self.net_a.n() {
            return true;
        }
        for j in 0..self.net_b.n() {
            if used >> j & 1 == 1 || !self.compatible(pi, i, j) {
                continue;
            }
            pi.push(j);
            if self.extend(pi, used | 1 << j) {
                return true;
            }
            pi.pop();
        }
        false
    }
}

/// Checks the witness condition directly.
pub fn is_witness(
    net_a: &Network,
    treat_a: SubWord,
    net_b: &Network,
    treat_b: SubWord,
    pi: &[usize],
) -> bool {
    let m = net_a.n();
    if pi.len() != m || net_b.n() != m {
        return false;
    }
    let mut seen = 0u32;
    for &p in pi {
        if p >= m || seen >> p & 1 == 1 {
            return false;
        }
        seen |= 1 << p;
    }
    (0..m).all(|i| {
        treat_a.get(i) == treat_b.get(pi[i])
            && (0..m).all(|j| net_a.is_linked(i, j) == net_b.is_linked(pi[i], pi[j]))
    })
}
