//! Fault-aware greedy local navigation.
//!
//! A node knows the lattice coordinates of every node, its own neighbours and
//! (for two-level navigation) its neighbours' neighbours together with their
//! liveness. It never knows the global shortcut layout.

pub(crate) mod engine;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::topology::{Network, NodeId};
use engine::Navigator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NavigationLevel {
    /// Score a neighbour by its own lattice distance to the target.
    OneLevel,
    /// Score a neighbour by the best lattice distance among itself and its
    /// alive neighbours (excluding the current node).
    TwoLevel,
}

impl NavigationLevel {
    pub fn as_number(&self) -> u8 {
        match self {
            NavigationLevel::OneLevel => 1,
            NavigationLevel::TwoLevel => 2,
        }
    }
}

impl fmt::Display for NavigationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_number())
    }
}

impl FromStr for NavigationLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(NavigationLevel::OneLevel),
            "2" => Ok(NavigationLevel::TwoLevel),
            _ => Err(format!("navigation level must be 1 or 2, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NavigationPolicy {
    pub level: NavigationLevel,
    /// A message that has made this many hops without arriving is lost.
    pub hop_limit: u32,
}

impl NavigationPolicy {
    pub fn new(level: NavigationLevel, hop_limit: u32) -> Self {
        assert!(hop_limit >= 1, "hop limit must be positive");
        NavigationPolicy { level, hop_limit }
    }

    pub fn two_level(hop_limit: usize) -> Self {
        Self::new(NavigationLevel::TwoLevel, hop_limit as u32)
    }

    pub fn one_level(hop_limit: usize) -> Self {
        Self::new(NavigationLevel::OneLevel, hop_limit as u32)
    }

    /// Loss bound of twice the intact navigation diameter.
    pub fn from_diameter(level: NavigationLevel, diameter: u32) -> Self {
        Self::new(level, (2 * diameter).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RouteStatus {
    Delivered,
    /// No alive neighbour other than the one the message came from.
    LostDeadEnd,
    LostHopLimit,
}

impl RouteStatus {
    pub fn is_delivered(&self) -> bool {
        matches!(self, RouteStatus::Delivered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingOutcome {
    pub status: RouteStatus,
    /// Source first, last node reached last.
    pub path: Vec<NodeId>,
}

impl RoutingOutcome {
    pub fn hops(&self) -> u32 {
        (self.path.len() - 1) as u32
    }

    /// Nodes that forwarded or held the message other than its endpoints.
    pub fn intermediate_count(&self) -> u32 {
        match self.status {
            RouteStatus::Delivered => self.hops().saturating_sub(1),
            _ => self.hops(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    Forward(NodeId),
    Blocked,
}

/// Greedy choice at `current` for a message heading to `target`.
///
/// Candidates are the alive neighbours of `current` other than `previous`.
/// The target itself wins outright; otherwise the lowest score wins. Ties go
/// to the candidate first in neighbour-list order, i.e. the smallest
/// displacement rank from `current`.
pub fn next_hop(
    net: &Network,
    current: NodeId,
    previous: Option<NodeId>,
    target: NodeId,
    level: NavigationLevel,
) -> NextHop {
    debug_assert!(net.is_alive(current) && current != target);
    let cfg = net.config();
    let mut best: Option<(u32, NodeId)> = None;
    for &w in net.neighbors(current) {
        if Some(w) == previous || !net.is_alive(w) {
            continue;
        }
        if w == target {
            return NextHop::Forward(w);
        }
        let own = cfg.distance(w, target);
        let score = match level {
            NavigationLevel::OneLevel => own,
            NavigationLevel::TwoLevel => net
                .neighbors(w)
                .iter()
                .filter(|&&u| u != current && net.is_alive(u))
                .map(|&u| cfg.distance(u, target))
                .fold(own, u32::min),
        };
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, w));
        }
    }
    best.map_or(NextHop::Blocked, |(_, w)| NextHop::Forward(w))
}

/// Routes one message, remembering only the node it just left.
pub fn route_message(
    net: &Network,
    source: NodeId,
    dest: NodeId,
    policy: &NavigationPolicy,
) -> RoutingOutcome {
    let mut path = vec![source];
    let mut previous = None;
    let mut current = source;
    let status = loop {
        if current == dest {
            break RouteStatus::Delivered;
        }
        if path.len() - 1 == policy.hop_limit as usize {
            break RouteStatus::LostHopLimit;
        }
        match next_hop(net, current, previous, dest, policy.level) {
            NextHop::Blocked => break RouteStatus::LostDeadEnd,
            NextHop::Forward(w) => {
                previous = Some(current);
                current = w;
                path.push(w);
            }
        }
    };
    RoutingOutcome { status, path }
}

/// Longest navigation path over all ordered pairs of alive nodes, routing
/// with a hop cap of `N`. Meant for intact networks; any undelivered pair is
/// an error.
pub fn navigation_diameter(net: &Network, level: NavigationLevel) -> Result<u32> {
    let nodes = net.alive_nodes();
    let cap = net.node_count() as u32;
    let (max_hops, lost, first) = nodes
        .par_iter()
        .map_init(
            || Navigator::new(net, level),
            |nav, &t| {
                nav.set_target(t);
                nav.prepare_all();
                let mut max_hops = 0u32;
                let mut lost = 0u64;
                let mut first: Option<(u32, u32)> = None;
                for &s in &nodes {
                    let (status, hops) = nav.walk(s, cap, |_| {});
                    if status.is_delivered() {
                        max_hops = max_hops.max(hops);
                    } else {
                        lost += 1;
                        if first.is_none() {
                            first = Some((s.0, t.0));
                        }
                    }
                }
                (max_hops, lost, first)
            },
        )
        .reduce(
            || (0, 0, None),
            |a, b| {
                let first = match (a.2, b.2) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                (a.0.max(b.0), a.1 + b.1, first)
            },
        );
    match first {
        None => Ok(max_hops),
        Some((s, t)) => Err(Error::Undeliverable {
            undelivered: lost,
            source_node: s,
            dest: t,
        }),
    }
}
