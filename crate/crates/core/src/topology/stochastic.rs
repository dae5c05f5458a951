//! Distance-biased random shortcuts.
//!
//! A partner `v` of node `u` is drawn with probability proportional to
//! `r(u, v)^-alpha` over all admissible `v`: not `u`, not a lattice neighbour,
//! and not already joined to `u` by a shortcut. Weights are evaluated as
//! `(r / 2)^-alpha` (same distribution, no underflow at the nearest shell).

use std::collections::HashSet;

use super::{LatticeConfig, Network, NetworkKind, NodeId, Shortcut};
use crate::error::{Error, Result};
use crate::rng::{Purpose, SimRng};

pub const DEFAULT_MAX_RESTARTS: usize = 100;

/// Consecutive rejected draws before switching to exact enumeration.
const MAX_REJECTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticParams {
    pub alpha: f64,
    pub seed: u64,
    /// Every node gets exactly two shortcut endpoints (degree 6).
    pub fixed_degree: bool,
}

impl StochasticParams {
    pub fn new(alpha: f64, seed: u64) -> Self {
        StochasticParams {
            alpha,
            seed,
            fixed_degree: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-node weight `(r / 2)^-alpha`, indexed by lattice distance.
fn distance_weights(cfg: &LatticeConfig, alpha: f64) -> Vec<f64> {
    (0..=cfg.max_distance())
        .map(|r| {
            if r < 2 {
                0.0
            } else {
                (r as f64 / 2.0).powf(-alpha)
            }
        })
        .collect()
}

/// Offsets from any node grouped by lattice distance, with cumulative shell
/// mass for drawing a distance first and then a node within the shell.
struct ShellSampler {
    shells: Vec<Vec<(u32, u32)>>,
    cumulative: Vec<f64>,
}

impl ShellSampler {
    fn new(cfg: &LatticeConfig, weights: &[f64]) -> Self {
        let l = cfg.side();
        let origin = NodeId(0);
        let mut shells = vec![Vec::new(); cfg.max_distance() as usize + 1];
        for di in 0..l {
            for dj in 0..l {
                let r = cfg.distance(origin, cfg.node(di, dj));
                shells[r as usize].push((di, dj));
            }
        }
        let mut acc = 0.0;
        let cumulative = shells
            .iter()
            .zip(weights)
            .map(|(shell, w)| {
                acc += shell.len() as f64 * w;
                acc
            })
            .collect();
        ShellSampler { shells, cumulative }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn draw(&self, cfg: &LatticeConfig, u: NodeId, rng: &mut SimRng) -> NodeId {
        let x = rng.unit_f64() * self.total();
        let r = self
            .cumulative
            .partition_point(|&c| c <= x)
            .min(self.shells.len() - 1);
        let shell = &self.shells[r];
        let (di, dj) = shell[rng.below(shell.len() as u64) as usize];
        let (i, j) = cfg.coords(u);
        let l = cfg.side();
        cfg.node((i + di) % l, (j + dj) % l)
    }
}

/// Weighted draw from explicit candidates. When every weight underflows to
/// zero (very large alpha) the draw is uniform over the nearest candidates.
fn pick_weighted(rng: &mut SimRng, candidates: &[(NodeId, u32)], weights: &[f64]) -> NodeId {
    debug_assert!(!candidates.is_empty());
    let total: f64 = candidates.iter().map(|&(_, r)| weights[r as usize]).sum();
    if total > 0.0 {
        let x = rng.unit_f64() * total;
        let mut acc = 0.0;
        for &(v, r) in candidates {
            acc += weights[r as usize];
            if x < acc {
                return v;
            }
        }
        // rounding at the top end; fall back to the last positive-weight node
        return candidates
            .iter()
            .rev()
            .find(|&&(_, r)| weights[r as usize] > 0.0)
            .unwrap()
            .0;
    }
    let nearest = candidates.iter().map(|&(_, r)| r).min().unwrap();
    let pool: Vec<NodeId> = candidates
        .iter()
        .filter(|&&(_, r)| r == nearest)
        .map(|&(v, _)| v)
        .collect();
    pool[rng.below(pool.len() as u64) as usize]
}

/// One shortcut per node, first ends visited in index order.
///
/// Inadmissible draws are redrawn, which samples exactly the distribution
/// renormalised over admissible partners. The result always has `N`
/// shortcuts.
pub fn generate_stochastic(cfg: LatticeConfig, params: &StochasticParams) -> Result<Network> {
    params.validate()?;
    let weights = distance_weights(&cfg, params.alpha);
    let sampler = ShellSampler::new(&cfg, &weights);
    let mut rng = SimRng::substream(params.seed, Purpose::Generation, 0);
    let n = cfg.node_count() as u32;
    let mut present: HashSet<Shortcut> = HashSet::with_capacity(n as usize);

    for u in (0..n).map(NodeId) {
        let mut chosen = None;
        for _ in 0..MAX_REJECTIONS {
            let v = sampler.draw(&cfg, u, &mut rng);
            let s = Shortcut::new(u, v).expect("shell r >= 2 excludes self");
            if !present.contains(&s) {
                chosen = Some(s);
                break;
            }
        }
        let s = match chosen {
            Some(s) => s,
            None => {
                let candidates: Vec<(NodeId, u32)> = (0..n)
                    .map(NodeId)
                    .filter_map(|v| {
                        let r = cfg.distance(u, v);
                        let s = Shortcut::new(u, v)?;
                        (r >= 2 && !present.contains(&s)).then_some((v, r))
                    })
                    .collect();
                if candidates.is_empty() {
                    return Err(Error::NoAdmissiblePartner { node: u.0 });
                }
                let v = pick_weighted(&mut rng, &candidates, &weights);
                Shortcut::new(u, v).unwrap()
            }
        };
        present.insert(s);
    }
    Network::from_shortcuts(cfg, NetworkKind::Stochastic, present)
}

/// Degree-6 variant with the default restart budget.
pub fn generate_stochastic_fixed_degree(
    cfg: LatticeConfig,
    params: &StochasticParams,
) -> Result<Network> {
    generate_stochastic_fixed_degree_with(cfg, params, DEFAULT_MAX_RESTARTS)
}

/// Stub matching: each node starts with two stubs; the lowest-index node with
/// stubs left draws partners among admissible nodes that still have stubs.
/// A deadlock restarts the whole matching on the next random stream.
pub fn generate_stochastic_fixed_degree_with(
    cfg: LatticeConfig,
    params: &StochasticParams,
    max_restarts: usize,
) -> Result<Network> {
    params.validate()?;
    if !cfg.node_count().is_multiple_of(2) {
        return Err(Error::InvalidParams(
            "fixed-degree generation needs an even node count".into(),
        ));
    }
    let weights = distance_weights(&cfg, params.alpha);
    for attempt in 0..max_restarts.max(1) {
        let mut rng =
            SimRng::substream(params.seed, Purpose::FixedDegreeGeneration, attempt as u64);
        if let Some(shortcuts) = try_match_stubs(&cfg, &weights, &mut rng) {
            return Network::from_shortcuts(cfg, NetworkKind::StochasticFixedDegree, shortcuts);
        }
    }
    Err(Error::MatchingExhausted {
        restarts: max_restarts.max(1),
    })
}

fn try_match_stubs(
    cfg: &LatticeConfig,
    weights: &[f64],
    rng: &mut SimRng,
) -> Option<Vec<Shortcut>> {
    const STUBS: u8 = 2;
    let n = cfg.node_count();
    let mut stubs = vec![STUBS; n];
    let mut partners: Vec<Vec<NodeId>> = vec![Vec::with_capacity(STUBS as usize); n];
    // ascending list of nodes that still have stubs
    let mut open: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
    let mut shortcuts = Vec::with_capacity(n);
    let mut candidates = Vec::new();

    while let Some(&u) = open.first() {
        while stubs[u.index()] > 0 {
            candidates.clear();
            candidates.extend(open.iter().filter_map(|&v| {
                let r = cfg.distance(u, v);
                (r >= 2 && !partners[u.index()].contains(&v)).then_some((v, r))
            }));
            if candidates.is_empty() {
                return None;
            }
            let v = pick_weighted(rng, &candidates, weights);
            shortcuts.push(Shortcut::new(u, v).unwrap());
            partners[u.index()].push(v);
            partners[v.index()].push(u);
            stubs[u.index()] -= 1;
            stubs[v.index()] -= 1;
            if stubs[v.index()] == 0 {
                let pos = open.binary_search(&v).unwrap();
                open.remove(pos);
            }
        }
        open.remove(0);
    }
    Some(shortcuts)
}
