use std::collections::VecDeque;

use serde::Serialize;

use super::assignment::{UnitSet, MAX_UNITS};
use crate::error::{Error, Result};

/// Undirected simple graph on `n` units, adjacency stored as one bit row
/// per unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    adj: Vec<u32>,
}

impl Network {
    /// Builds a network from 0-based edges. Rejects self links, duplicate
    /// edges and endpoints out of range.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNetwork("n must be at least 1".into()));
        }
        if n > MAX_UNITS {
            return Err(Error::EnumerationCap { n, cap: MAX_UNITS });
        }
        let mut adj = vec![0u32; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge [{}, {}] references a unit outside 1..={n}",
                    a + 1,
                    b + 1
                )));
            }
            if a == b {
                return Err(Error::InvalidNetwork(format!("self link on unit {}", a + 1)));
            }
            if adj[a] >> b & 1 == 1 {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge [{}, {}]",
                    a + 1,
                    b + 1
                )));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Ok(Network { adj })
    }

    /// Builds a network from 1-based edges as written in scenario files.
    pub fn from_external_edges(n: usize, edges: &[[usize; 2]]) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(edges.len());
        for &[a, b] in edges {
            if a == 0 || b == 0 {
                return Err(Error::InvalidNetwork(format!(
                    "edge [{a}, {b}] uses unit 0; units are numbered from 1"
                )));
            }
            zero_based.push((a - 1, b - 1));
        }
        Network::from_edges(n, &zero_based)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Network::from_edges(n, &[])
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Network::from_edges(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        Network::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        Network::from_edges(n, &edges)
    }

    /// Unit 0 is the center, linked to units `1..=leaves`.
    pub fn star(leaves: usize) -> Result<Self> {
        let edges: Vec<_> = (1..=leaves).map(|b| (0, b)).collect();
        Network::from_edges(leaves + 1, &edges)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn units(&self) -> UnitSet {
        UnitSet::full(self.n())
    }

    pub fn is_linked(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn neighbors(&self, i: usize) -> UnitSet {
        UnitSet::from_mask(self.adj[i])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].count_ones() as usize
    }

    pub fn row(&self, i: usize) -> u32 {
        self.adj[i]
    }

    /// 0-based edge list with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n() {
            for b in self.neighbors(a).iter().filter(|&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }

    /// Units at path distance at most `k` from `i`, by breadth-first
    /// frontier expansion. Always contains `i`.
    pub fn neighborhood(&self, i: usize, k: usize) -> UnitSet {
        let mut reached = 1u32 << i;
        let mut frontier = reached;
        for _ in 0..k {
            let mut next = 0u32;
            for j in UnitSet::from_mask(frontier).iter() {
                next |= self.adj[j];
            }
            frontier = next & !reached;
            if frontier == 0 {
                break;
            }
            reached |= frontier;
        }
        UnitSet::from_mask(reached)
    }

    /// Shortest path lengths from `i`; `None` for unreachable units.
    pub fn distances_from(&self, i: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[i] = Some(0);
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or_default();
            for v in self.neighbors(u).iter() {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest finite distance between any two units.
    pub fn diameter(&self) -> usize {
        (0..self.n())
            .flat_map(|i| self.distances_from(i).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }

    /// Subnetwork induced on `set`, relabelled `0..set.len()` in ascending
    /// unit order.
    pub fn induced(&self, set: UnitSet) -> Network {
        let members: Vec<usize> = set.iter().collect();
        let adj = members
            .iter()
            .map(|&a| {
                let mut row = 0u32;
                for (kb, &b) in members.iter().enumerate() {
                    if self.is_linked(a, b) {
                        row |= 1 << kb;
                    }
                }
                row
            })
            .collect();
        Network { adj }
    }
}

/// Edge-list form used in scenario files and reports (1-based).
#[derive(Debug, Clone, Serialize)]
pub struct NetworkRecord {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Network> for NetworkRecord {
    fn from(net: &Network) -> Self {
        NetworkRecord {
            n: net.n(),
            edges: net.edges().into_iter().map(|(a, b)| [a + 1, b + 1]).collect(),
        }
    }
}
