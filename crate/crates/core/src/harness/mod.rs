//! Experiment protocol: pick the best of several generated networks, then
//! sweep the number of failed nodes with repeated random draws.

mod config;
mod figure;

pub use config::{
    ExperimentConfig, FailureCounts, SelectionOrder, CONFIG_HEADER, DEFAULT_B_FRACTIONS,
};
pub use figure::{reproduce_figure, FigureOutput, Figures};

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::failure::{
    cascade_from, inject_failures, CascadeParams, CascadeReport, FailureScenario,
};
use crate::metrics::{evaluate, Evaluation, MessageSet, MetricsReport};
use crate::rng::{derive_seed, Purpose};
use crate::routing::{navigation_diameter, NavigationPolicy};
use crate::topology::{
    build_torus, generate_ibt, generate_stochastic, generate_stochastic_fixed_degree, IbtParams,
    Network, NetworkKind, StochasticParams,
};

/// Which candidate a selected network came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleId {
    Torus,
    Seeded { index: usize, seed: u64 },
    Lengths(IbtParams),
}

impl std::fmt::Display for SampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleId::Torus => f.write_str("torus"),
            SampleId::Seeded { index, seed } => write!(f, "sample {index} seed {seed}"),
            SampleId::Lengths(p) => write!(f, "lengths {}:{} scheme {}", p.s1, p.s2, p.scheme),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: SampleId,
    pub l2: Option<f64>,
    pub f_max: u64,
}

/// The chosen network with its intact evaluation.
#[derive(Debug, Clone)]
pub struct Selection {
    pub network: Network,
    pub id: SampleId,
    pub intact: Evaluation,
    pub nav_diameter: u32,
    /// Policy used for damaged copies of this network.
    pub policy: NavigationPolicy,
    pub candidates: Vec<Candidate>,
}

pub fn generate_candidate(
    config: &ExperimentConfig,
    kind: NetworkKind,
    id: SampleId,
) -> Result<Network> {
    let cfg = config.lattice()?;
    match (kind, id) {
        (NetworkKind::Torus, _) => Ok(build_torus(cfg)),
        (NetworkKind::Ibt, SampleId::Lengths(p)) => generate_ibt(cfg, &p),
        (NetworkKind::Stochastic, SampleId::Seeded { seed, .. }) => {
            generate_stochastic(cfg, &StochasticParams::new(config.alpha, seed))
        }
        (NetworkKind::StochasticFixedDegree, SampleId::Seeded { seed, .. }) => {
            generate_stochastic_fixed_degree(cfg, &StochasticParams::new(config.alpha, seed))
        }
        (kind, id) => Err(Error::InvalidParams(format!(
            "{id} is not a {kind} candidate"
        ))),
    }
}

fn candidate_ids(config: &ExperimentConfig, kind: NetworkKind) -> Vec<SampleId> {
    match kind {
        NetworkKind::Torus => vec![SampleId::Torus],
        NetworkKind::Ibt => config
            .ibt_candidates()
            .into_iter()
            .map(SampleId::Lengths)
            .collect(),
        NetworkKind::Stochastic | NetworkKind::StochasticFixedDegree => (0..config.samples)
            .map(|index| SampleId::Seeded {
                index,
                seed: derive_seed(config.seed, Purpose::Seeds, index as u64),
            })
            .collect(),
    }
}

fn better(order: SelectionOrder, a: &Candidate, b: &Candidate) -> bool {
    // an undefined l2 ranks last
    let l2 = |c: &Candidate| c.l2.unwrap_or(f64::INFINITY);
    let ord = match order {
        SelectionOrder::L2ThenFmax => l2(a).total_cmp(&l2(b)).then(a.f_max.cmp(&b.f_max)),
        SelectionOrder::FmaxThenL2 => a.f_max.cmp(&b.f_max).then(l2(a).total_cmp(&l2(b))),
    };
    ord == Ordering::Less
}

/// Generates the configured kind's candidates and keeps the best intact one.
/// Ties keep the earlier candidate.
pub fn select_best_sample(config: &ExperimentConfig) -> Result<Selection> {
    select_kind(config, config.kind)
}

pub fn select_kind(config: &ExperimentConfig, kind: NetworkKind) -> Result<Selection> {
    let ids = candidate_ids(config, kind);
    if ids.is_empty() {
        return Err(Error::InvalidParams("no candidates to select from".into()));
    }
    let mut candidates = Vec::with_capacity(ids.len());
    let mut best: Option<(Network, Evaluation)> = None;
    let mut best_at = 0;
    for id in ids {
        let net = generate_candidate(config, kind, id)?;
        let policy = NavigationPolicy::new(
            config.level,
            config.hop_limit.unwrap_or(net.node_count() as u32),
        );
        let eval = evaluate(&net, &MessageSet::new(&net, config.messages), &policy);
        let c = Candidate {
            id,
            l2: eval.report.l2,
            f_max: eval.report.f_max,
        };
        if best.is_none() || better(config.selection, &c, &candidates[best_at]) {
            best = Some((net, eval));
            best_at = candidates.len();
        }
        candidates.push(c);
    }
    let (network, intact) = best.expect("at least one candidate");
    let all_pairs =
        intact.report.messages == network.alive_count() as u64 * (network.alive_count() as u64 - 1);
    let nav_diameter = if all_pairs && intact.outcomes.lost() == 0 && config.hop_limit.is_none() {
        intact.outcomes.max_delivered_hops
    } else {
        navigation_diameter(&network, config.level)?
    };
    let policy = match config.hop_limit {
        Some(h) => NavigationPolicy::new(config.level, h),
        None => NavigationPolicy::from_diameter(config.level, nav_diameter),
    };
    let mut intact = intact;
    intact.report.nav_diameter = Some(nav_diameter);
    Ok(Selection {
        network,
        id: candidates[best_at].id,
        intact,
        nav_diameter,
        policy,
        candidates,
    })
}

/// Mean and population root-mean-square deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub rms: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        // shifted by the first value so identical repetitions give it back exactly
        let base = values[0];
        let mean = base + values.iter().map(|v| v - base).sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Stat {
            mean,
            rms: var.sqrt(),
        })
    }
}

/// One failure draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub b: usize,
    pub repetition: usize,
    pub stream: u64,
    pub report: MetricsReport,
    pub cascade: Option<CascadeReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub b: usize,
    pub fraction: f64,
    pub u_over_m: Stat,
    /// Over repetitions that delivered anything.
    pub l2: Option<Stat>,
    pub f_max: Stat,
    pub overload: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub kind: NetworkKind,
    pub node_count: usize,
    pub repetitions: usize,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<Run>,
    pub cascade: Option<CascadeParams>,
}

impl SweepReport {
    /// False when some cascade hit the round cap.
    pub fn all_terminated(&self) -> bool {
        self.runs
            .iter()
            .all(|r| r.cascade.as_ref().is_none_or(|c| c.terminated))
    }

    pub fn runs_for(&self, b: usize) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(move |r| r.b == b)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# kind={} N={} repetitions={}",
            self.kind, self.node_count, self.repetitions
        );
        out.push_str("# rms = population root-mean-square deviation over repetitions\n");
        if let Some(p) = &self.cascade {
            let _ = writeln!(out, "# f_th={}", p.threshold);
        }
        out.push_str("b,b_over_N,u_over_M_mean,u_over_M_rms,l2_mean,l2_rms,f_max_mean,f_max_rms,overload_mean,overload_rms\n");
        for r in &self.rows {
            let pair = |s: &Option<Stat>| {
                s.map_or_else(|| "NA,NA".to_string(), |s| format!("{},{}", s.mean, s.rms))
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.b,
                r.fraction,
                r.u_over_m.mean,
                r.u_over_m.rms,
                pair(&r.l2),
                r.f_max.mean,
                r.f_max.rms,
                pair(&r.overload),
            );
        }
        out
    }
}

/// Failure substream of repetition `rep` with `b` failed nodes. Depends on
/// `b` itself, so a draw does not change when the list of counts does.
pub fn failure_stream(b: usize, rep: usize) -> u64 {
    ((b as u64) << 32) | rep as u64
}

/// Runs `repetitions` failure draws per failure count on the selected
/// network. With `cascade` set every draw also runs the overload cascade.
pub fn sweep(
    config: &ExperimentConfig,
    selected: &Selection,
    cascade: Option<&CascadeParams>,
) -> Result<SweepReport> {
    let net = &selected.network;
    let n = net.node_count();
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for b in config.b_values() {
        if b >= net.alive_count() {
            return Err(Error::TooManyFailures {
                requested: b,
                alive: net.alive_count(),
            });
        }
        let mut intact: Option<Run> = None;
        let first = runs.len();
        for rep in 0..config.repetitions {
            let stream = failure_stream(b, rep);
            if let Some(r) = &intact {
                // nothing random at b = 0
                runs.push(Run {
                    repetition: rep,
                    stream,
                    ..r.clone()
                });
                continue;
            }
            let scenario = FailureScenario {
                failed: b,
                seed: config.seed,
                stream,
            };
            let (damaged, eval) = if b == 0 {
                (net.clone(), selected.intact.clone())
            } else {
                let damaged = inject_failures(net, &scenario)?;
                let eval = evaluate(
                    &damaged,
                    &MessageSet::new(&damaged, config.messages),
                    &selected.policy,
                );
                (damaged, eval)
            };
            let cascade = cascade.map(|p| {
                cascade_from(
                    &damaged,
                    b,
                    p,
                    config.messages,
                    &selected.policy,
                    Some(&eval),
                )
            });
            let run = Run {
                b,
                repetition: rep,
                stream,
                report: eval.report,
                cascade,
            };
            if b == 0 {
                intact = Some(run.clone());
            }
            runs.push(run);
        }
        let these = &runs[first..];
        let collect =
            |f: &dyn Fn(&Run) -> Option<f64>| these.iter().filter_map(f).collect::<Vec<f64>>();
        rows.push(SweepRow {
            b,
            fraction: b as f64 / n as f64,
            u_over_m: Stat::of(&collect(&|r| Some(r.report.u_over_m))).expect("repetitions >= 1"),
            l2: Stat::of(&collect(&|r| r.report.l2)),
            f_max: Stat::of(&collect(&|r| Some(r.report.f_max as f64))).expect("repetitions >= 1"),
            overload: Stat::of(&collect(&|r| {
                r.cascade.as_ref().map(|c| c.overload_fraction())
            })),
        });
    }
    Ok(SweepReport {
        kind: net.kind(),
        node_count: n,
        repetitions: config.repetitions,
        rows,
        runs,
        cascade: cascade.copied(),
    })
}

/// `f_max` of the selected intact iBT network, the cascade reference.
pub fn ibt_reference(config: &ExperimentConfig) -> Result<u64> {
    Ok(select_kind(config, NetworkKind::Ibt)?.intact.report.f_max)
}

/// Cascade parameters from `config.cascade_k` and a reference `f_max`.
pub fn cascade_params(
    config: &ExperimentConfig,
    reference_f_max: u64,
) -> Result<Option<CascadeParams>> {
    config
        .cascade_k
        .map(|k| {
            let mut p = CascadeParams::from_reference(k, reference_f_max)?;
            p.max_rounds = config.max_rounds;
            Ok(p)
        })
        .transpose()
}
