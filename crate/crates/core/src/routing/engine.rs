//! Bulk routing toward one target at a time.
//!
//! With the target fixed, excluding the previous node only matters when it is
//! the node's best candidate. So each node needs just two choices: its best
//! candidate and the best one among the rest. Both are computed lazily per
//! target (stamped by a generation counter) and every source walks them.

use crate::routing::{NavigationLevel, RouteStatus};
use crate::topology::{ring_distance, Network, NodeId};

const BLOCKED: u32 = u32::MAX;

pub(crate) struct Navigator<'a> {
    net: &'a Network,
    level: NavigationLevel,
    target: u32,
    generation: u32,
    row: Vec<u32>,
    col: Vec<u32>,
    row_dist: Vec<u32>,
    col_dist: Vec<u32>,
    /// Lattice distance of every node to the target.
    dist: Vec<u32>,
    /// Two smallest target distances among each node's alive neighbours.
    near_stamp: Vec<u32>,
    near: Vec<(u32, u32)>,
    /// Best and runner-up neighbour slots of each node.
    choice_stamp: Vec<u32>,
    choice: Vec<(u32, u32)>,
}

impl<'a> Navigator<'a> {
    pub(crate) fn new(net: &'a Network, level: NavigationLevel) -> Self {
        let n = net.node_count();
        let cfg = net.config();
        let l = cfg.side() as usize;
        let (row, col) = (0..n as u32).map(|v| cfg.coords(NodeId(v))).unzip();
        let two = level == NavigationLevel::TwoLevel;
        Navigator {
            net,
            level,
            target: u32::MAX,
            generation: 0,
            row,
            col,
            row_dist: vec![0; l],
            col_dist: vec![0; l],
            dist: vec![0; n],
            near_stamp: if two { vec![0; n] } else { Vec::new() },
            near: if two { vec![(0, 0); n] } else { Vec::new() },
            choice_stamp: vec![0; n],
            choice: vec![(BLOCKED, BLOCKED); n],
        }
    }

    pub(crate) fn set_target(&mut self, target: NodeId) {
        let cfg = self.net.config();
        let l = cfg.side();
        let (ti, tj) = cfg.coords(target);
        for x in 0..l {
            self.row_dist[x as usize] = ring_distance(x, ti, l);
            self.col_dist[x as usize] = ring_distance(x, tj, l);
        }
        for ((d, &i), &j) in self.dist.iter_mut().zip(&self.row).zip(&self.col) {
            *d = self.row_dist[i as usize] + self.col_dist[j as usize];
        }
        self.target = target.0;
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.near_stamp.fill(0);
            self.choice_stamp.fill(0);
            self.generation = 1;
        }
    }

    #[inline]
    fn near(&mut self, w: usize) -> (u32, u32) {
        if self.near_stamp[w] == self.generation {
            return self.near[w];
        }
        let v = self.compute_near(w);
        self.near_stamp[w] = self.generation;
        self.near[w] = v;
        v
    }

    #[inline]
    fn compute_near(&self, w: usize) -> (u32, u32) {
        let net = self.net;
        let alive = net.alive_mask();
        let offsets = net.offsets();
        let (mut b1, mut b2) = (u32::MAX, u32::MAX);
        for &u in &net.raw_neighbors()[offsets[w] as usize..offsets[w + 1] as usize] {
            if !alive[u.index()] {
                continue;
            }
            let d = self.dist[u.index()];
            if d < b1 {
                b2 = b1;
                b1 = d;
            } else if d < b2 {
                b2 = d;
            }
        }
        (b1, b2)
    }

    #[inline]
    fn choices(&mut self, c: usize) -> (u32, u32) {
        if self.choice_stamp[c] == self.generation {
            return self.choice[c];
        }
        if self.level == NavigationLevel::TwoLevel {
            let net = self.net;
            let offsets = net.offsets();
            for &w in &net.raw_neighbors()[offsets[c] as usize..offsets[c + 1] as usize] {
                self.near(w.index());
            }
        }
        let v = self.compute_choices(c);
        self.choice_stamp[c] = self.generation;
        self.choice[c] = v;
        v
    }

    /// Fills every node's choices up front; cheaper than the lazy path when
    /// most nodes send to the target.
    pub(crate) fn prepare_all(&mut self) {
        let alive = self.net.alive_mask();
        let generation = self.generation;
        if self.level == NavigationLevel::TwoLevel {
            for w in 0..alive.len() {
                self.near[w] = self.compute_near(w);
            }
            self.near_stamp.fill(generation);
        }
        for (c, &up) in alive.iter().enumerate() {
            if up {
                self.choice[c] = self.compute_choices(c);
                self.choice_stamp[c] = generation;
            }
        }
    }

    /// Best and runner-up slots at `c`, first in list order on ties. The
    /// target itself scores below everything else. Two-level scoring reads
    /// the `near` table, which must be current.
    #[inline]
    fn compute_choices(&self, c: usize) -> (u32, u32) {
        let net = self.net;
        let alive = net.alive_mask();
        let offsets = net.offsets();
        let nbrs = &net.raw_neighbors()[offsets[c] as usize..offsets[c + 1] as usize];
        let here = self.dist[c];
        let (mut s1, mut k1) = (u32::MAX, BLOCKED);
        let (mut s2, mut k2) = (u32::MAX, BLOCKED);
        for (k, &w) in nbrs.iter().enumerate() {
            let w = w.index();
            if !alive[w] {
                continue;
            }
            let own = self.dist[w];
            let score = if own == 0 {
                0
            } else {
                let s = match self.level {
                    NavigationLevel::OneLevel => own,
                    NavigationLevel::TwoLevel => {
                        // drop one occurrence of `c` from w's neighbour multiset
                        let (b1, b2) = self.near[w];
                        own.min(if here == b1 { b2 } else { b1 })
                    }
                };
                s + 1
            };
            if score < s1 {
                (s2, k2) = (s1, k1);
                (s1, k1) = (score, k as u32);
            } else if score < s2 {
                (s2, k2) = (score, k as u32);
            }
        }
        (k1, k2)
    }

    /// Routes `source` to the current target. `on_enter` sees every node the
    /// message enters other than the target itself.
    #[inline]
    pub(crate) fn walk(
        &mut self,
        source: NodeId,
        hop_limit: u32,
        mut on_enter: impl FnMut(u32),
    ) -> (RouteStatus, u32) {
        debug_assert!(self.target != u32::MAX);
        let offsets = self.net.offsets();
        let mut c = source.0;
        let mut arrival = BLOCKED;
        let mut hops = 0;
        loop {
            if c == self.target {
                return (RouteStatus::Delivered, hops);
            }
            if hops == hop_limit {
                return (RouteStatus::LostHopLimit, hops);
            }
            let (best, runner_up) = self.choices(c as usize);
            let k = if best == arrival { runner_up } else { best };
            if k == BLOCKED {
                return (RouteStatus::LostDeadEnd, hops);
            }
            let e = (offsets[c as usize] + k) as usize;
            c = self.net.raw_neighbors()[e].0;
            arrival = self.net.reverse_slots()[e];
            hops += 1;
            if c != self.target {
                on_enter(c);
            }
        }
    }
}
