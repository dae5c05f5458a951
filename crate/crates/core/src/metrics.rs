//! Navigation length, forwarding index, load distribution and undelivered
//! fraction over a message set.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::rng::{Purpose, SimRng};
use crate::routing::engine::Navigator;
use crate::routing::{NavigationPolicy, RouteStatus, RoutingOutcome};
use crate::topology::{Network, NodeId};

/// How the message set is drawn from the alive nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageMode {
    /// Every ordered pair of distinct alive nodes.
    AllPairs,
    /// `count` ordered pairs drawn uniformly without replacement.
    Sampled { count: u64, seed: u64 },
}

impl fmt::Display for MessageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageMode::AllPairs => f.write_str("all-pairs"),
            MessageMode::Sampled { count, seed } => write!(f, "sample:{count}:{seed}"),
        }
    }
}

impl FromStr for MessageMode {
    type Err = String;

    /// `all-pairs`, `sample:<M>` (seed 0) or `sample:<M>:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all-pairs" {
            return Ok(MessageMode::AllPairs);
        }
        let rest = s.strip_prefix("sample:").ok_or_else(|| {
            format!("message mode must be `all-pairs` or `sample:<M>[:<seed>]`, got `{s}`")
        })?;
        let (count, seed) = match rest.split_once(':') {
            Some((c, seed)) => (
                c,
                seed.parse::<u64>()
                    .map_err(|e| format!("bad sample seed `{seed}`: {e}"))?,
            ),
            None => (rest, 0),
        };
        let count: u64 = count
            .parse()
            .map_err(|e| format!("bad sample size `{count}`: {e}"))?;
        if count == 0 {
            return Err("sample size must be positive".into());
        }
        Ok(MessageMode::Sampled { count, seed })
    }
}

impl MessageMode {
    /// Same mode with the sampling seed replaced; all-pairs is unchanged.
    pub fn reseeded(self, seed: u64) -> Self {
        match self {
            MessageMode::AllPairs => MessageMode::AllPairs,
            MessageMode::Sampled { count, .. } => MessageMode::Sampled { count, seed },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Pairs {
    All,
    /// `(target, sources)` groups, targets ascending, sources ascending.
    Grouped(Vec<(NodeId, Vec<NodeId>)>),
}

/// Ordered `(source, dest)` pairs between distinct alive nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageSet {
    mode: MessageMode,
    nodes: Vec<NodeId>,
    pairs: Pairs,
}

impl MessageSet {
    pub fn new(net: &Network, mode: MessageMode) -> Self {
        let nodes = net.alive_nodes();
        let a = nodes.len() as u64;
        let total = a * a.saturating_sub(1);
        let pairs = match mode {
            MessageMode::Sampled { count, seed } if count < total => {
                Pairs::Grouped(sample_pairs(&nodes, count, seed))
            }
            _ => Pairs::All,
        };
        MessageSet { mode, nodes, pairs }
    }

    pub fn all_pairs(net: &Network) -> Self {
        Self::new(net, MessageMode::AllPairs)
    }

    pub fn mode(&self) -> MessageMode {
        self.mode
    }

    /// `M`.
    pub fn len(&self) -> u64 {
        match &self.pairs {
            Pairs::All => {
                let a = self.nodes.len() as u64;
                a * a.saturating_sub(1)
            }
            Pairs::Grouped(groups) => groups.iter().map(|(_, s)| s.len() as u64).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn groups(&self) -> Vec<(NodeId, &[NodeId])> {
        match &self.pairs {
            Pairs::All => self
                .nodes
                .iter()
                .map(|&t| (t, self.nodes.as_slice()))
                .collect(),
            Pairs::Grouped(g) => g.iter().map(|(t, s)| (*t, s.as_slice())).collect(),
        }
    }

    /// Every `(source, dest)` pair, grouped by destination.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.groups().into_iter().flat_map(|(t, sources)| {
            sources
                .iter()
                .filter(move |&&s| s != t)
                .map(move |&s| (s, t))
        })
    }
}

/// Floyd's sampling of `count` distinct pair indices out of `A (A - 1)`.
fn sample_pairs(nodes: &[NodeId], count: u64, seed: u64) -> Vec<(NodeId, Vec<NodeId>)> {
    let a = nodes.len() as u64;
    let total = a * (a - 1);
    let mut rng = SimRng::substream(seed, Purpose::Messages, 0);
    let mut chosen: HashSet<u64> = HashSet::with_capacity(count as usize);
    for j in (total - count)..total {
        let t = rng.below(j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut pairs: Vec<(NodeId, NodeId)> = chosen
        .into_iter()
        .map(|idx| {
            let s = idx / (a - 1);
            let r = idx % (a - 1);
            let d = if r >= s { r + 1 } else { r };
            (nodes[d as usize], nodes[s as usize])
        })
        .collect();
    pairs.sort_unstable();
    let mut groups: Vec<(NodeId, Vec<NodeId>)> = Vec::new();
    for (t, s) in pairs {
        match groups.last_mut() {
            Some((last, sources)) if *last == t => sources.push(s),
            _ => groups.push((t, vec![s])),
        }
    }
    groups
}

/// Per-node count of message traversals. Sources and the final delivery are
/// not counted; every other node a message enters is, including every node of
/// the prefix walked by a lost message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadTable {
    loads: Vec<u64>,
    alive: Vec<bool>,
}

impl LoadTable {
    pub fn new(loads: Vec<u64>, alive: Vec<bool>) -> Self {
        assert_eq!(loads.len(), alive.len());
        LoadTable { loads, alive }
    }

    pub fn get(&self, v: NodeId) -> u64 {
        self.loads[v.index()]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.loads
    }

    pub fn total(&self) -> u64 {
        self.loads.iter().sum()
    }

    pub fn alive_loads(&self) -> impl Iterator<Item = u64> + '_ {
        self.loads
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&l, _)| l)
    }

    /// Population variance over alive nodes.
    pub fn variance(&self) -> f64 {
        let n = self.alive_loads().count();
        if n == 0 {
            return 0.0;
        }
        let mean = self.alive_loads().map(|l| l as f64).sum::<f64>() / n as f64;
        self.alive_loads()
            .map(|l| (l as f64 - mean).powi(2))
            .sum::<f64>()
            / n as f64
    }
}

/// Maximum load over all nodes.
pub fn forwarding_index(loads: &LoadTable) -> u64 {
    loads.loads.iter().copied().max().unwrap_or(0)
}

/// Counts of alive nodes per load bin `[k w, (k + 1) w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bin_width: u64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Adds another histogram with the same bin width.
    pub fn accumulate(&mut self, other: &Histogram) {
        assert_eq!(self.bin_width, other.bin_width);
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn csv_header() -> &'static str {
        "load_bin_lo,load_bin_hi,count"
    }

    /// Rows for occupied bins only; `load_bin_hi` is exclusive.
    pub fn csv_rows(&self) -> Vec<String> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, c)| {
                let lo = k as u64 * self.bin_width;
                format!("{lo},{},{c}", lo + self.bin_width)
            })
            .collect()
    }
}

pub fn load_histogram(loads: &LoadTable, bin_width: u64) -> Histogram {
    assert!(bin_width >= 1, "bin width must be positive");
    let mut counts = Vec::new();
    for l in loads.alive_loads() {
        let bin = (l / bin_width) as usize;
        if bin >= counts.len() {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    Histogram { bin_width, counts }
}

/// Delivery statistics over a message set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutcomeSummary {
    pub messages: u64,
    pub delivered: u64,
    pub lost_dead_end: u64,
    pub lost_hop_limit: u64,
    pub delivered_hops: u64,
    pub max_delivered_hops: u32,
}

impl OutcomeSummary {
    pub fn from_outcomes<'a>(outcomes: impl IntoIterator<Item = &'a RoutingOutcome>) -> Self {
        let mut s = OutcomeSummary::default();
        for o in outcomes {
            s.record(o.status, o.hops());
        }
        s
    }

    fn record(&mut self, status: RouteStatus, hops: u32) {
        self.messages += 1;
        match status {
            RouteStatus::Delivered => {
                self.delivered += 1;
                self.delivered_hops += hops as u64;
                self.max_delivered_hops = self.max_delivered_hops.max(hops);
            }
            RouteStatus::LostDeadEnd => self.lost_dead_end += 1,
            RouteStatus::LostHopLimit => self.lost_hop_limit += 1,
        }
    }

    fn merge(self, o: Self) -> Self {
        OutcomeSummary {
            messages: self.messages + o.messages,
            delivered: self.delivered + o.delivered,
            lost_dead_end: self.lost_dead_end + o.lost_dead_end,
            lost_hop_limit: self.lost_hop_limit + o.lost_hop_limit,
            delivered_hops: self.delivered_hops + o.delivered_hops,
            max_delivered_hops: self.max_delivered_hops.max(o.max_delivered_hops),
        }
    }

    pub fn lost(&self) -> u64 {
        self.lost_dead_end + self.lost_hop_limit
    }

    /// Mean hops over delivered messages; `None` when nothing arrived.
    pub fn l2(&self) -> Option<f64> {
        (self.delivered > 0).then(|| self.delivered_hops as f64 / self.delivered as f64)
    }

    /// `u / M`; 1 when nothing was delivered.
    pub fn undelivered_fraction(&self) -> f64 {
        if self.delivered == 0 {
            1.0
        } else {
            self.lost() as f64 / self.messages as f64
        }
    }
}

/// Mean path length with every lost message counted at `penalty` hops.
pub fn penalized_l2(outcomes: &OutcomeSummary, penalty: u32) -> Option<f64> {
    assert!(penalty >= 1, "penalty must be positive");
    (outcomes.messages > 0).then(|| {
        (outcomes.delivered_hops + outcomes.lost() * penalty as u64) as f64
            / outcomes.messages as f64
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Average navigation distance over delivered messages.
    pub l2: Option<f64>,
    /// Lost messages counted at the hop limit.
    pub l2_penalized: Option<f64>,
    pub u_over_m: f64,
    pub f_max: u64,
    pub messages: u64,
    /// Exact mean shortest-path length, when computed.
    pub d: Option<f64>,
    pub nav_diameter: Option<u32>,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl MetricsReport {
    pub fn csv_header() -> &'static str {
        "l2,u_over_M,f_max,d,nav_diameter"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            opt(&self.l2),
            self.u_over_m,
            self.f_max,
            opt(&self.d),
            opt(&self.nav_diameter)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub loads: LoadTable,
    pub outcomes: OutcomeSummary,
}

/// Routes every message of the set and aggregates loads and path lengths.
///
/// Work is split by destination across the rayon pool; the per-worker integer
/// tallies are summed, so the result does not depend on the worker count.
pub fn evaluate(net: &Network, messages: &MessageSet, policy: &NavigationPolicy) -> Evaluation {
    let n = net.node_count();
    let groups = messages.groups();
    let (loads, outcomes) = groups
        .par_iter()
        .fold(
            || {
                (
                    Navigator::new(net, policy.level),
                    vec![0u64; n],
                    OutcomeSummary::default(),
                )
            },
            |(mut nav, mut loads, mut summary), &(t, sources)| {
                nav.set_target(t);
                if sources.len() * 8 >= n {
                    nav.prepare_all();
                }
                for &s in sources {
                    if s == t {
                        continue;
                    }
                    let (status, hops) = nav.walk(s, policy.hop_limit, |v| loads[v as usize] += 1);
                    summary.record(status, hops);
                }
                (nav, loads, summary)
            },
        )
        .map(|(_, loads, summary)| (loads, summary))
        .reduce(
            || (vec![0u64; n], OutcomeSummary::default()),
            |(mut a, sa), (b, sb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, sa.merge(sb))
            },
        );
    let loads = LoadTable::new(loads, net.alive_mask().to_vec());
    let report = MetricsReport {
        l2: outcomes.l2(),
        l2_penalized: penalized_l2(&outcomes, policy.hop_limit),
        u_over_m: outcomes.undelivered_fraction(),
        f_max: forwarding_index(&loads),
        messages: outcomes.messages,
        d: None,
        nav_diameter: None,
    };
    Evaluation {
        report,
        loads,
        outcomes,
    }
}

/// Shortest-path statistics over ordered pairs of distinct alive nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceSummary {
    pub total_distance: u64,
    pub reachable_pairs: u64,
    pub unreachable_pairs: u64,
}

impl DistanceSummary {
    /// Mean over reachable pairs.
    pub fn mean(&self) -> Option<f64> {
        (self.reachable_pairs > 0).then(|| self.total_distance as f64 / self.reachable_pairs as f64)
    }

    pub fn is_connected(&self) -> bool {
        self.unreachable_pairs == 0
    }
}

/// Breadth-first search from every alive node through alive nodes only.
pub fn global_average_distance(net: &Network) -> DistanceSummary {
    let n = net.node_count();
    let nodes = net.alive_nodes();
    nodes
        .par_iter()
        .map_init(
            || (vec![u32::MAX; n], VecDeque::new()),
            |(dist, queue), &s| {
                dist.fill(u32::MAX);
                dist[s.index()] = 0;
                queue.push_back(s);
                let (mut total, mut reached) = (0u64, 0u64);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u.index()];
                    total += du as u64;
                    reached += 1;
                    for &w in net.neighbors(u) {
                        if net.is_alive(w) && dist[w.index()] == u32::MAX {
                            dist[w.index()] = du + 1;
                            queue.push_back(w);
                        }
                    }
                }
                DistanceSummary {
                    total_distance: total,
                    reachable_pairs: reached - 1,
                    unreachable_pairs: nodes.len() as u64 - reached,
                }
            },
        )
        .reduce(
            || DistanceSummary {
                total_distance: 0,
                reachable_pairs: 0,
                unreachable_pairs: 0,
            },
            |a, b| DistanceSummary {
                total_distance: a.total_distance + b.total_distance,
                reachable_pairs: a.reachable_pairs + b.reachable_pairs,
                unreachable_pairs: a.unreachable_pairs + b.unreachable_pairs,
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::route_message;
    use crate::topology::*;
    use proptest::prelude::*;

    fn torus(l: u32) -> Network {
        build_torus(LatticeConfig::new(l).unwrap())
    }

    /// Sum of lattice distances over ordered distinct pairs, by enumeration.
    fn brute_distance_sum(l: u32) -> (u64, u64) {
        let c = LatticeConfig::new(l).unwrap();
        let n = c.node_count() as u32;
        let mut sum = 0;
        let mut pairs = 0;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    sum += c.distance(NodeId(a), NodeId(b)) as u64;
                    pairs += 1;
                }
            }
        }
        (sum, pairs)
    }

    #[test]
    fn brute_force_oracle_l8() {
        assert_eq!(brute_distance_sum(8), (16384, 4032));
        // loads: sum of (d - 1) spread over 64 nodes
        assert_eq!((16384 - 4032) / 64, 193);
    }

    #[test]
    fn torus_l8_all_pairs() {
        let net = torus(8);
        let eval = evaluate(
            &net,
            &MessageSet::all_pairs(&net),
            &NavigationPolicy::two_level(64),
        );
        let (sum, pairs) = brute_distance_sum(8);
        assert_eq!(eval.report.messages, pairs);
        assert_eq!(eval.report.l2, Some(sum as f64 / pairs as f64));
        assert!((eval.report.l2.unwrap() - 4.0635).abs() < 1e-4);
        assert_eq!(eval.report.u_over_m, 0.0);
        assert!(eval.loads.as_slice().iter().all(|&l| l == 193));
        assert_eq!(forwarding_index(&eval.loads), 193);
        assert_eq!(eval.report.l2_penalized, eval.report.l2);
    }

    #[test]
    fn torus_l16_matches_brute_force() {
        let net = torus(16);
        let eval = evaluate(
            &net,
            &MessageSet::all_pairs(&net),
            &NavigationPolicy::one_level(256),
        );
        let (sum, pairs) = brute_distance_sum(16);
        assert_eq!(eval.outcomes.delivered_hops, sum);
        assert_eq!(eval.loads.total(), sum - pairs);
        let per_node = (sum - pairs) / 256;
        assert!(eval.loads.as_slice().iter().all(|&l| l == per_node));
    }

    #[test]
    fn global_distance_on_torus() {
        for l in [4u32, 8, 10] {
            let net = torus(l);
            let d = global_average_distance(&net);
            let (sum, pairs) = brute_distance_sum(l);
            assert_eq!((d.total_distance, d.reachable_pairs), (sum, pairs));
            assert!(d.is_connected());
            // over all ordered pairs including self-pairs the mean is L/2
            let n = (l * l) as f64;
            assert_eq!(sum as f64 / (n * n), l as f64 / 2.0);
        }
    }

    #[test]
    fn global_distance_flags_disconnection() {
        let c = LatticeConfig::new(8).unwrap();
        let net = torus(8).with_failed(c.lattice_neighbors(c.node(3, 3)));
        let d = global_average_distance(&net);
        assert!(!d.is_connected());
        assert_eq!(d.unreachable_pairs, 2 * 59);
    }

    #[test]
    fn histogram_examples() {
        let uniform = LoadTable::new(vec![193; 64], vec![true; 64]);
        let h = load_histogram(&uniform, 10);
        assert_eq!(h.occupied_bins(), 1);
        assert_eq!(h.total(), 64);
        assert_eq!(h.csv_rows(), vec!["190,200,64".to_string()]);

        let mut alive = vec![true; 4];
        alive[3] = false;
        let t = LoadTable::new(vec![0, 5, 12, 0], alive);
        let h = load_histogram(&t, 5);
        assert_eq!(h.counts, vec![1, 1, 1]);
        assert_eq!(h.total(), 3);
        assert_eq!(forwarding_index(&t), 12);
        assert_eq!(
            forwarding_index(&LoadTable::new(vec![0; 4], vec![true; 4])),
            0
        );
    }

    #[test]
    fn penalized_examples() {
        let none_lost = OutcomeSummary {
            messages: 4,
            delivered: 4,
            delivered_hops: 10,
            max_delivered_hops: 4,
            ..Default::default()
        };
        assert_eq!(penalized_l2(&none_lost, 50), none_lost.l2());
        let all_lost = OutcomeSummary {
            messages: 3,
            lost_dead_end: 2,
            lost_hop_limit: 1,
            ..Default::default()
        };
        assert_eq!(penalized_l2(&all_lost, 17), Some(17.0));
        assert_eq!(all_lost.l2(), None);
        assert_eq!(all_lost.undelivered_fraction(), 1.0);
    }

    #[test]
    fn penalized_matches_outcome_list() {
        // hops 2, 5, lost (3 hops walked), lost (0 hops), delivered 1
        let c = LatticeConfig::new(8).unwrap();
        let mk = |status, len: usize| RoutingOutcome {
            status,
            path: (0..=len as u32).map(|k| c.node(0, k % 8)).collect(),
        };
        let outcomes = [
            mk(RouteStatus::Delivered, 2),
            mk(RouteStatus::Delivered, 5),
            mk(RouteStatus::LostHopLimit, 3),
            mk(RouteStatus::LostDeadEnd, 0),
            mk(RouteStatus::Delivered, 1),
        ];
        let s = OutcomeSummary::from_outcomes(&outcomes);
        let by_hand = (2.0 + 5.0 + 9.0 + 9.0 + 1.0) / 5.0;
        assert_eq!(penalized_l2(&s, 9), Some(by_hand));
        assert_eq!(s.l2(), Some(8.0 / 3.0));
        assert_eq!(s.undelivered_fraction(), 0.4);
    }

    #[test]
    fn sampled_messages_are_distinct_and_alive() {
        let c = LatticeConfig::new(8).unwrap();
        let net = torus(8).with_failed([c.node(1, 1), c.node(5, 2)]);
        let set = MessageSet::new(
            &net,
            MessageMode::Sampled {
                count: 500,
                seed: 9,
            },
        );
        assert_eq!(set.len(), 500);
        let pairs: Vec<_> = set.pairs().collect();
        assert_eq!(pairs.len(), 500);
        let unique: HashSet<_> = pairs.iter().copied().collect();
        assert_eq!(unique.len(), 500);
        for (s, t) in pairs {
            assert!(s != t && net.is_alive(s) && net.is_alive(t));
        }
        let again = MessageSet::new(
            &net,
            MessageMode::Sampled {
                count: 500,
                seed: 9,
            },
        );
        assert_eq!(set, again);
        // oversized samples degrade to all pairs
        let big = MessageSet::new(
            &net,
            MessageMode::Sampled {
                count: 1_000_000,
                seed: 9,
            },
        );
        assert_eq!(big.len(), 62 * 61);
    }

    #[test]
    fn sampling_is_roughly_uniform() {
        // each of the 12 ordered pairs on 4 alive nodes drawn 6 at a time
        let c = LatticeConfig::new(4).unwrap();
        let failed: Vec<NodeId> = (4..16).map(NodeId).collect();
        let net = build_torus(c).with_failed(failed);
        let mut counts = std::collections::HashMap::new();
        for seed in 0..6000 {
            for p in MessageSet::new(&net, MessageMode::Sampled { count: 6, seed }).pairs() {
                *counts.entry(p).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 12);
        for &c in counts.values() {
            // expectation 3000, sd ~ 39
            assert!((2850..3150).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn message_mode_parsing() {
        assert_eq!(
            "all-pairs".parse::<MessageMode>().unwrap(),
            MessageMode::AllPairs
        );
        assert_eq!(
            "sample:1000".parse::<MessageMode>().unwrap(),
            MessageMode::Sampled {
                count: 1000,
                seed: 0
            }
        );
        assert_eq!(
            "sample:10:4".parse::<MessageMode>().unwrap(),
            MessageMode::Sampled { count: 10, seed: 4 }
        );
        for bad in ["", "sample:", "sample:0", "sample:x", "sample:5:", "pairs"] {
            assert!(bad.parse::<MessageMode>().is_err(), "{bad}");
        }
        let m = MessageMode::Sampled { count: 7, seed: 3 };
        assert_eq!(m.to_string().parse::<MessageMode>().unwrap(), m);
    }

    #[test]
    fn report_csv_row() {
        let net = torus(8);
        let mut eval = evaluate(
            &net,
            &MessageSet::all_pairs(&net),
            &NavigationPolicy::two_level(16),
        );
        eval.report.nav_diameter = Some(8);
        assert_eq!(
            MetricsReport::csv_header(),
            "l2,u_over_M,f_max,d,nav_diameter"
        );
        assert_eq!(
            eval.report.csv_row(),
            format!("{},0,193,NA,8", 16384.0 / 4032.0)
        );
    }

    #[test]
    fn empty_message_set() {
        let c = LatticeConfig::new(4).unwrap();
        let failed: Vec<NodeId> = (1..16).map(NodeId).collect();
        let net = build_torus(c).with_failed(failed);
        let set = MessageSet::all_pairs(&net);
        assert!(set.is_empty());
        let eval = evaluate(&net, &set, &NavigationPolicy::two_level(8));
        assert_eq!(eval.report.l2, None);
        assert_eq!(eval.report.u_over_m, 1.0);
        assert_eq!(eval.report.f_max, 0);
    }

    fn faulty(seed: u64, failures: usize) -> Network {
        let c = LatticeConfig::new(10).unwrap();
        let net = generate_stochastic(c, &StochasticParams::new(1.0, seed)).unwrap();
        let mut rng = SimRng::substream(seed, Purpose::Failure, 1);
        net.with_failed(
            (0..failures)
                .map(|_| NodeId(rng.below(100) as u32))
                .collect::<Vec<_>>(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn load_conservation(seed in any::<u64>(), failures in 0usize..30, limit in 1u32..25) {
            let net = faulty(seed, failures);
            let policy = NavigationPolicy::two_level(limit as usize);
            let set = MessageSet::all_pairs(&net);
            let eval = evaluate(&net, &set, &policy);
            let outcomes: Vec<RoutingOutcome> = set.pairs().map(|(s, t)| route_message(&net, s, t, &policy)).collect();
            let intermediates: u64 = outcomes.iter().map(|o| o.intermediate_count() as u64).sum();
            prop_assert_eq!(eval.loads.total(), intermediates);
            prop_assert_eq!(eval.outcomes, OutcomeSummary::from_outcomes(&outcomes));
            for v in net.failed_nodes() {
                prop_assert_eq!(eval.loads.get(v), 0);
            }
            prop_assert!((0.0..=1.0).contains(&eval.report.u_over_m));
        }

        #[test]
        fn navigation_never_beats_shortest_paths(seed in any::<u64>()) {
            let net = faulty(seed, 0);
            let eval = evaluate(&net, &MessageSet::all_pairs(&net), &NavigationPolicy::two_level(100));
            let d = global_average_distance(&net);
            prop_assert_eq!(eval.outcomes.delivered, d.reachable_pairs);
            prop_assert!(eval.report.l2.unwrap() >= d.mean().unwrap());
        }

        #[test]
        fn penalty_is_monotone(seed in any::<u64>(), failures in 10usize..40, p in 1u32..50) {
            let net = faulty(seed, failures);
            let eval = evaluate(&net, &MessageSet::all_pairs(&net), &NavigationPolicy::two_level(12));
            prop_assume!(eval.outcomes.lost() > 0);
            prop_assert!(penalized_l2(&eval.outcomes, p) <= penalized_l2(&eval.outcomes, p + 1));
        }
    }
}
