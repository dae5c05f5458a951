//! Random node failures and threshold-driven cascading overloads.

use crate::error::{Error, Result};
use crate::metrics::{evaluate, Evaluation, MessageMode, MessageSet};
use crate::rng::{derive_seed, Purpose, SimRng};
use crate::routing::NavigationPolicy;
use crate::topology::{Network, NodeId};

/// `failed` nodes chosen uniformly without replacement among the alive ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureScenario {
    pub failed: usize,
    pub seed: u64,
    /// Substream index; the harness gives every (b, repetition) its own.
    pub stream: u64,
}

impl FailureScenario {
    pub fn new(failed: usize, seed: u64) -> Self {
        FailureScenario {
            failed,
            seed,
            stream: 0,
        }
    }
}

pub fn inject_failures(net: &Network, scenario: &FailureScenario) -> Result<Network> {
    let mut alive = net.alive_nodes();
    if scenario.failed >= alive.len() && scenario.failed > 0 {
        return Err(Error::TooManyFailures {
            requested: scenario.failed,
            alive: alive.len(),
        });
    }
    let mut rng = SimRng::substream(scenario.seed, Purpose::Failure, scenario.stream);
    // partial Fisher-Yates
    for k in 0..scenario.failed {
        let j = k + rng.below((alive.len() - k) as u64) as usize;
        alive.swap(k, j);
    }
    Ok(net.with_failed(alive[..scenario.failed].iter().copied()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    /// Nodes with load strictly above this fail.
    pub threshold: u64,
    /// Set when the threshold was derived as `k * reference_f_max`.
    pub assurance_factor: Option<f64>,
    pub reference_f_max: Option<u64>,
    pub max_rounds: usize,
}

impl CascadeParams {
    pub const DEFAULT_MAX_ROUNDS: usize = 1000;

    pub fn with_threshold(threshold: u64) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::InvalidParams(
                "cascade threshold must be >= 1".into(),
            ));
        }
        Ok(CascadeParams {
            threshold,
            assurance_factor: None,
            reference_f_max: None,
            max_rounds: Self::DEFAULT_MAX_ROUNDS,
        })
    }

    /// `threshold = floor(k * reference_f_max)`.
    pub fn from_reference(k: f64, reference_f_max: u64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParams(format!(
                "assurance factor must be positive, got {k}"
            )));
        }
        let mut p = Self::with_threshold((k * reference_f_max as f64).floor() as u64)?;
        p.assurance_factor = Some(k);
        p.reference_f_max = Some(reference_f_max);
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeRound {
    pub removed: usize,
    /// Alive nodes after this round's removals.
    pub alive: usize,
    pub f_max: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeReport {
    pub node_count: usize,
    pub initially_failed: usize,
    /// The last round removes nothing unless the round cap was hit.
    pub rounds: Vec<CascadeRound>,
    pub overload_failed: usize,
    pub final_alive: usize,
    pub terminated: bool,
}

impl CascadeReport {
    /// Overload failures over `N`; the initial failures are not included.
    pub fn overload_fraction(&self) -> f64 {
        self.overload_failed as f64 / self.node_count as f64
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("round,removed,alive,f_max_this_round\n");
        for (k, r) in self.rounds.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                k + 1,
                r.removed,
                r.alive,
                r.f_max
            ));
        }
        out
    }
}

/// Fails the scenario's nodes, then iterates overload removal to a fixed point.
pub fn run_cascade(
    net: &Network,
    scenario: &FailureScenario,
    params: &CascadeParams,
    mode: MessageMode,
    policy: &NavigationPolicy,
) -> Result<CascadeReport> {
    let damaged = inject_failures(net, scenario)?;
    Ok(cascade_from(
        &damaged,
        scenario.failed,
        params,
        mode,
        policy,
        None,
    ))
}

/// Cascade starting from an already damaged network. `first` may carry the
/// round-one evaluation when the caller has it already.
pub fn cascade_from(
    damaged: &Network,
    initially_failed: usize,
    params: &CascadeParams,
    mode: MessageMode,
    policy: &NavigationPolicy,
    first: Option<&Evaluation>,
) -> CascadeReport {
    let mut net = damaged.clone();
    let mut rounds = Vec::new();
    let mut terminated = false;
    for round in 0..params.max_rounds {
        let round_mode = match mode {
            MessageMode::Sampled { seed, .. } if round > 0 => {
                mode.reseeded(derive_seed(seed, Purpose::Messages, round as u64))
            }
            _ => mode,
        };
        let owned;
        let eval = match first {
            Some(e) if round == 0 => e,
            _ => {
                owned = evaluate(&net, &MessageSet::new(&net, round_mode), policy);
                &owned
            }
        };
        let overloaded: Vec<NodeId> = (0..net.node_count() as u32)
            .map(NodeId)
            .filter(|&v| net.is_alive(v) && eval.loads.get(v) > params.threshold)
            .collect();
        let removed = overloaded.len();
        net = net.with_failed(overloaded);
        rounds.push(CascadeRound {
            removed,
            alive: net.alive_count(),
            f_max: eval.report.f_max,
        });
        if removed == 0 {
            terminated = true;
            break;
        }
    }
    let overload_failed = rounds.iter().map(|r| r.removed).sum();
    CascadeReport {
        node_count: net.node_count(),
        initially_failed,
        rounds,
        overload_failed,
        final_alive: net.alive_count(),
        terminated,
    }
}
