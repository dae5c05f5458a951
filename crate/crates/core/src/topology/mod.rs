//! Torus lattices and the shortcut generators layered on top of them.

mod ibt;
mod stochastic;
mod text;

pub use ibt::{generate_ibt, IbtParams, InterlacingScheme};
pub use stochastic::{
    generate_stochastic, generate_stochastic_fixed_degree, generate_stochastic_fixed_degree_with,
    StochasticParams, DEFAULT_MAX_RESTARTS,
};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Side length of an `L x L` torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeConfig {
    side: u32,
}

impl LatticeConfig {
    pub const MIN_SIDE: u32 = 4;
    /// Node ids are `u32`; keep `N` comfortably inside that.
    pub const MAX_SIDE: u32 = 1 << 14;

    pub fn new(side: u32) -> Result<Self> {
        if !(Self::MIN_SIDE..=Self::MAX_SIDE).contains(&side) {
            return Err(Error::InvalidLattice(format!(
                "side {side} outside [{}, {}]",
                Self::MIN_SIDE,
                Self::MAX_SIDE
            )));
        }
        Ok(LatticeConfig { side })
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn node_count(&self) -> usize {
        (self.side as usize) * (self.side as usize)
    }

    pub fn node(&self, i: u32, j: u32) -> NodeId {
        debug_assert!(i < self.side && j < self.side);
        NodeId(i * self.side + j)
    }

    pub fn coords(&self, n: NodeId) -> (u32, u32) {
        (n.0 / self.side, n.0 % self.side)
    }

    pub fn contains(&self, n: NodeId) -> bool {
        (n.0 as usize) < self.node_count()
    }

    /// Node at `(i + di, j + dj)` with wrap-around; offsets may be negative.
    pub fn offset(&self, n: NodeId, di: i64, dj: i64) -> NodeId {
        let l = self.side as i64;
        let (i, j) = self.coords(n);
        let ni = (i as i64 + di).rem_euclid(l) as u32;
        let nj = (j as i64 + dj).rem_euclid(l) as u32;
        self.node(ni, nj)
    }

    /// Wrap-around Manhattan distance.
    pub fn distance(&self, a: NodeId, b: NodeId) -> u32 {
        let (ai, aj) = self.coords(a);
        let (bi, bj) = self.coords(b);
        ring_distance(ai, bi, self.side) + ring_distance(aj, bj, self.side)
    }

    /// Largest distance on the lattice, `2 * floor(L / 2)`.
    pub fn max_distance(&self) -> u32 {
        2 * (self.side / 2)
    }

    /// Ordering key of the displacement from `from` to `to`.
    ///
    /// Each axis offset is wrapped into `(-L/2, L/2]` and ranked
    /// `0, +1, -1, +2, -2, ...`; the pair of ranks compares lexicographically.
    /// At the origin this agrees with ascending node index for the nearest
    /// nodes, and it is the same key at every node.
    pub fn displacement_rank(&self, from: NodeId, to: NodeId) -> (u32, u32) {
        let l = self.side;
        let rank = |a: u32, b: u32| {
            let d = (b + l - a) % l;
            if d <= l / 2 {
                2 * d
            } else {
                2 * (l - d) + 1
            }
        };
        let (fi, fj) = self.coords(from);
        let (ti, tj) = self.coords(to);
        (rank(fi, ti), rank(fj, tj))
    }

    /// The four lattice neighbours of `n` (distinct because `L >= 4`).
    pub fn lattice_neighbors(&self, n: NodeId) -> [NodeId; 4] {
        [
            self.offset(n, -1, 0),
            self.offset(n, 1, 0),
            self.offset(n, 0, -1),
            self.offset(n, 0, 1),
        ]
    }
}

#[inline]
pub(crate) fn ring_distance(a: u32, b: u32, side: u32) -> u32 {
    let d = a.abs_diff(b);
    d.min(side - d)
}

/// Lattice distance between two nodes of `cfg`.
pub fn torus_distance(a: NodeId, b: NodeId, cfg: &LatticeConfig) -> u32 {
    cfg.distance(a, b)
}

/// Row-major node index: `(i, j)` is `i * L + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected shortcut, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shortcut {
    a: NodeId,
    b: NodeId,
}

impl Shortcut {
    /// Canonicalises the endpoint order. Returns `None` for a self-loop.
    pub fn new(x: NodeId, y: NodeId) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Shortcut { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Shortcut { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn a(&self) -> NodeId {
        self.a
    }

    pub fn b(&self) -> NodeId {
        self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    Torus,
    Stochastic,
    StochasticFixedDegree,
    Ibt,
}

impl NetworkKind {
    pub const ALL: [NetworkKind; 4] = [
        NetworkKind::Torus,
        NetworkKind::Stochastic,
        NetworkKind::StochasticFixedDegree,
        NetworkKind::Ibt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NetworkKind::Torus => "torus",
            NetworkKind::Stochastic => "stochastic",
            NetworkKind::StochasticFixedDegree => "stochastic-fixed",
            NetworkKind::Ibt => "ibt",
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NetworkKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown network kind `{s}` (torus, stochastic, stochastic-fixed, ibt)")
            })
    }
}

/// A torus plus shortcuts, with a per-node alive mask.
///
/// Adjacency is held in compressed form. Each neighbour list is ordered by
/// displacement from its node (see [`LatticeConfig::displacement_rank`]), so
/// list order means the same thing at every node and greedy tie-breaking by
/// list position commutes with translations of the torus. Failed nodes keep
/// their links; routing simply never enters them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    config: LatticeConfig,
    kind: NetworkKind,
    shortcuts: Vec<Shortcut>,
    alive: Vec<bool>,
    offsets: Vec<u32>,
    neighbors: Vec<NodeId>,
    /// For edge slot `e` from `u` to `v`, the slot of `u` inside `v`'s list.
    reverse_slot: Vec<u32>,
}

impl Network {
    /// Builds a network from a shortcut list, validating every shortcut.
    pub fn from_shortcuts(
        config: LatticeConfig,
        kind: NetworkKind,
        shortcuts: impl IntoIterator<Item = Shortcut>,
    ) -> Result<Self> {
        let n = config.node_count();
        let mut set = BTreeSet::new();
        for s in shortcuts {
            if !config.contains(s.b) {
                return Err(Error::InvalidParams(format!(
                    "shortcut {} {} out of range",
                    s.a, s.b
                )));
            }
            if config.distance(s.a, s.b) < 2 {
                return Err(Error::InvalidParams(format!(
                    "shortcut {} {} duplicates a lattice link",
                    s.a, s.b
                )));
            }
            if !set.insert(s) {
                return Err(Error::InvalidParams(format!(
                    "duplicate shortcut {} {}",
                    s.a, s.b
                )));
            }
        }
        let shortcuts: Vec<Shortcut> = set.into_iter().collect();

        let mut lists: Vec<Vec<NodeId>> = (0..n as u32)
            .map(|v| config.lattice_neighbors(NodeId(v)).to_vec())
            .collect();
        for s in &shortcuts {
            lists[s.a.index()].push(s.b);
            lists[s.b.index()].push(s.a);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(4 * n + 2 * shortcuts.len());
        offsets.push(0u32);
        for (u, mut list) in lists.into_iter().enumerate() {
            list.sort_unstable_by_key(|&v| config.displacement_rank(NodeId(u as u32), v));
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len() as u32);
        }
        let mut reverse_slot = vec![0u32; neighbors.len()];
        for u in 0..n {
            for e in offsets[u] as usize..offsets[u + 1] as usize {
                let v = neighbors[e].index();
                let list = &neighbors[offsets[v] as usize..offsets[v + 1] as usize];
                let slot = list
                    .iter()
                    .position(|&x| x == NodeId(u as u32))
                    .expect("adjacency is symmetric");
                reverse_slot[e] = slot as u32;
            }
        }

        Ok(Network {
            config,
            kind,
            shortcuts,
            alive: vec![true; n],
            offsets,
            neighbors,
            reverse_slot,
        })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.config.node_count()
    }

    /// Shortcuts in ascending canonical order.
    pub fn shortcuts(&self) -> &[Shortcut] {
        &self.shortcuts
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v.index()] as usize..self.offsets[v.index() + 1] as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        (self.offsets[v.index() + 1] - self.offsets[v.index()]) as usize
    }

    pub fn is_alive(&self, v: NodeId) -> bool {
        self.alive[v.index()]
    }

    pub fn alive_mask(&self) -> &[bool] {
        &self.alive
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn alive_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count() as u32)
            .map(NodeId)
            .filter(|&v| self.is_alive(v))
            .collect()
    }

    pub fn failed_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count() as u32)
            .map(NodeId)
            .filter(|&v| !self.is_alive(v))
            .collect()
    }

    /// Copy with the given nodes additionally marked failed.
    pub fn with_failed(&self, failed: impl IntoIterator<Item = NodeId>) -> Network {
        let mut net = self.clone();
        for v in failed {
            net.alive[v.index()] = false;
        }
        net
    }

    /// Copy with every node alive again.
    pub fn intact(&self) -> Network {
        let mut net = self.clone();
        net.alive.iter_mut().for_each(|a| *a = true);
        net
    }

    pub(crate) fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub(crate) fn raw_neighbors(&self) -> &[NodeId] {
        &self.neighbors
    }

    pub(crate) fn reverse_slots(&self) -> &[u32] {
        &self.reverse_slot
    }

    /// Bit-exact text form; see [`Network::from_text`].
    pub fn to_text(&self) -> String {
        text::write(self)
    }

    /// Parses the text form written by [`Network::to_text`].
    pub fn from_text(input: &str) -> Result<Network> {
        text::parse(input)
    }
}

/// The bare torus: every node has degree 4.
pub fn build_torus(cfg: LatticeConfig) -> Network {
    Network::from_shortcuts(cfg, NetworkKind::Torus, std::iter::empty())
        .expect("empty shortcut set is valid")
}

/// Total lattice length of all shortcuts divided by `N`.
pub fn unit_wiring_cost(net: &Network) -> f64 {
    let cfg = net.config();
    let total: u64 = net
        .shortcuts()
        .iter()
        .map(|s| cfg.distance(s.a(), s.b()) as u64)
        .sum();
    total as f64 / cfg.node_count() as f64
}
