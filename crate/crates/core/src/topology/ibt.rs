//! Deterministic interlaced bypass tori.
//!
//! Every node carries bypass links of one of two lengths `s1`, `s2`. Which
//! length a node carries alternates with `floor(c / 2)` of the coordinate
//! orthogonal to the link, so neighbouring pairs of rows (columns) interlace
//! short and long bypasses. Two wiring schemes are provided; both give degree
//! 6 at every node. The parity scheme is periodic with period 4 on each
//! axis, which keeps the load of its nodes nearly uniform.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{LatticeConfig, Network, NetworkKind, NodeId, Shortcut};
use crate::error::{Error, Result};

/// How bypass links are laid onto the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InterlacingScheme {
    /// Nodes with `i + j` even carry first-axis links to `(i +- s(j), j)`,
    /// odd nodes carry second-axis links to `(i, j +- s(i))`. When
    /// `s = L / 2` the two links would coincide, so such a node instead links
    /// to its antipode along both axes. Needs `s | L` and `s <= L / 2`.
    #[default]
    ParityBypass,
    /// One bypass per axis. Along each ring the nodes are paired into a perfect
    /// matching with stride `s`: `x <-> x + s` when `floor(x / s)` is even.
    /// Ring `j` of the first axis uses `s(j)`, ring `i` of the second axis
    /// uses `s(i)`. Needs `2 s | L`.
    RingMatching,
}

impl InterlacingScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterlacingScheme::RingMatching => "ring-matching",
            InterlacingScheme::ParityBypass => "parity-bypass",
        }
    }
}

impl fmt::Display for InterlacingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterlacingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ring-matching" => Ok(InterlacingScheme::RingMatching),
            "parity-bypass" => Ok(InterlacingScheme::ParityBypass),
            _ => Err(format!(
                "unknown interlacing scheme `{s}` (ring-matching, parity-bypass)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IbtParams {
    pub s1: u32,
    pub s2: u32,
    pub scheme: InterlacingScheme,
}

impl IbtParams {
    pub fn new(s1: u32, s2: u32) -> Self {
        IbtParams {
            s1,
            s2,
            scheme: InterlacingScheme::default(),
        }
    }

    pub fn validate(&self, cfg: &LatticeConfig) -> Result<()> {
        let l = cfg.side();
        if self.s1 == self.s2 {
            return Err(Error::InvalidParams(format!(
                "bypass lengths must differ, got {} twice",
                self.s1
            )));
        }
        for s in [self.s1, self.s2] {
            if s < 2 || s % 2 != 0 {
                return Err(Error::InvalidParams(format!(
                    "bypass length {s} must be even and >= 2"
                )));
            }
            let ok = match self.scheme {
                InterlacingScheme::RingMatching => l.is_multiple_of(2 * s),
                InterlacingScheme::ParityBypass => l.is_multiple_of(s) && 2 * s <= l,
            };
            if !ok {
                let need = match self.scheme {
                    InterlacingScheme::RingMatching => "2*s dividing L",
                    InterlacingScheme::ParityBypass => "s dividing L and s <= L/2",
                };
                return Err(Error::InvalidParams(format!(
                    "bypass length {s} invalid for L={l} under {} ({need})",
                    self.scheme
                )));
            }
        }
        Ok(())
    }

    /// Length carried by rings whose orthogonal coordinate is `c`.
    fn length_for(&self, c: u32) -> u32 {
        if (c / 2).is_multiple_of(2) {
            self.s1
        } else {
            self.s2
        }
    }
}

fn matched(x: u32, s: u32, l: u32) -> u32 {
    if (x / s).is_multiple_of(2) {
        (x + s) % l
    } else {
        (x + l - s) % l
    }
}

/// Builds the bypass network; no randomness involved.
pub fn generate_ibt(cfg: LatticeConfig, params: &IbtParams) -> Result<Network> {
    params.validate(&cfg)?;
    let l = cfg.side();
    let mut links = BTreeSet::new();
    for i in 0..l {
        for j in 0..l {
            let u = cfg.node(i, j);
            let mut add = |v: NodeId| {
                links.insert(Shortcut::new(u, v).expect("bypass length >= 2"));
            };
            match params.scheme {
                InterlacingScheme::RingMatching => {
                    add(cfg.node(matched(i, params.length_for(j), l), j));
                    add(cfg.node(i, matched(j, params.length_for(i), l)));
                }
                InterlacingScheme::ParityBypass => {
                    let s = if (i + j) % 2 == 0 {
                        params.length_for(j)
                    } else {
                        params.length_for(i)
                    };
                    if 2 * s == l {
                        add(cfg.node((i + s) % l, j));
                        add(cfg.node(i, (j + s) % l));
                    } else if (i + j) % 2 == 0 {
                        add(cfg.node((i + s) % l, j));
                        add(cfg.node((i + l - s) % l, j));
                    } else {
                        add(cfg.node(i, (j + s) % l));
                        add(cfg.node(i, (j + l - s) % l));
                    }
                }
            }
        }
    }
    Network::from_shortcuts(cfg, NetworkKind::Ibt, links)
}
