//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! swnet-config v1
//! # comments and blank lines are ignored
//! size = 64
//! kind = stochastic
//! b_fractions = 0,0.01,0.05,0.1,0.2,0.3
//! ```
//!
//! Unknown keys, repeated keys and a missing or different header are errors.
//! Keys left out keep their defaults.

use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::MessageMode;
use crate::routing::NavigationLevel;
use crate::topology::{IbtParams, InterlacingScheme, LatticeConfig, NetworkKind};

pub const CONFIG_HEADER: &str = "swnet-config v1";

pub const DEFAULT_B_FRACTIONS: [f64; 6] = [0.0, 0.01, 0.05, 0.1, 0.2, 0.3];

/// Failure counts, given directly or as fractions of `N` (rounded down).
#[derive(Debug, Clone, PartialEq)]
pub enum FailureCounts {
    Counts(Vec<usize>),
    Fractions(Vec<f64>),
}

impl FailureCounts {
    pub fn resolve(&self, node_count: usize) -> Vec<usize> {
        match self {
            FailureCounts::Counts(c) => c.clone(),
            FailureCounts::Fractions(f) => f
                .iter()
                .map(|x| (x * node_count as f64).floor() as usize)
                .collect(),
        }
    }
}

/// Ordering used to pick the best generated sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionOrder {
    #[default]
    L2ThenFmax,
    FmaxThenL2,
}

impl SelectionOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionOrder::L2ThenFmax => "l2,f_max",
            SelectionOrder::FmaxThenL2 => "f_max,l2",
        }
    }
}

impl FromStr for SelectionOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l2,f_max" => Ok(SelectionOrder::L2ThenFmax),
            "f_max,l2" => Ok(SelectionOrder::FmaxThenL2),
            _ => Err(format!(
                "selection must be `l2,f_max` or `f_max,l2`, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub size: u32,
    pub kind: NetworkKind,
    pub alpha: f64,
    /// Candidate `(s1, s2)` pairs for iBT selection.
    pub ibt_lengths: Vec<(u32, u32)>,
    pub ibt_scheme: InterlacingScheme,
    pub samples: usize,
    pub repetitions: usize,
    pub failures: FailureCounts,
    pub level: NavigationLevel,
    /// `None` means twice the navigation diameter of the selected network.
    pub hop_limit: Option<u32>,
    /// Assurance factor `k` for `f_th = k * f_max(iBT)`; `None` disables cascades.
    pub cascade_k: Option<f64>,
    pub max_rounds: usize,
    pub messages: MessageMode,
    pub seed: u64,
    pub selection: SelectionOrder,
    /// `None` picks a width per histogram panel.
    pub bin_width: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            size: 64,
            kind: NetworkKind::Stochastic,
            alpha: 1.0,
            ibt_lengths: vec![(8, 32)],
            ibt_scheme: InterlacingScheme::default(),
            samples: 20,
            repetitions: 10,
            failures: FailureCounts::Fractions(DEFAULT_B_FRACTIONS.to_vec()),
            level: NavigationLevel::TwoLevel,
            hop_limit: None,
            cascade_k: None,
            max_rounds: 1000,
            messages: MessageMode::AllPairs,
            seed: 1,
            selection: SelectionOrder::default(),
            bin_width: None,
        }
    }
}

impl ExperimentConfig {
    /// `L = 128`, 100 samples, 10^6 sampled messages. Long-running.
    pub fn full_scale() -> Self {
        ExperimentConfig {
            size: 128,
            samples: 100,
            messages: MessageMode::Sampled {
                count: 1_000_000,
                seed: 1,
            },
            ..Self::default()
        }
    }

    pub fn lattice(&self) -> Result<LatticeConfig> {
        LatticeConfig::new(self.size)
    }

    pub fn b_values(&self) -> Vec<usize> {
        self.failures
            .resolve(self.size as usize * self.size as usize)
    }

    pub fn ibt_candidates(&self) -> Vec<IbtParams> {
        self.ibt_lengths
            .iter()
            .map(|&(s1, s2)| IbtParams {
                s1,
                s2,
                scheme: self.ibt_scheme,
            })
            .collect()
    }

    /// Checks everything that does not need a generated network.
    pub fn validate(&self) -> Result<()> {
        let cfg = self.lattice()?;
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.samples == 0 {
            return bad("samples must be >= 1".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.ibt_lengths.is_empty() {
            return bad("ibt_lengths must not be empty".into());
        }
        if self.kind == NetworkKind::Ibt {
            for p in self.ibt_candidates() {
                p.validate(&cfg)?;
            }
        }
        if let FailureCounts::Fractions(f) = &self.failures {
            if let Some(x) = f.iter().find(|x| !(0.0..1.0).contains(*x)) {
                return bad(format!("failure fraction {x} outside [0, 1)"));
            }
        }
        let n = cfg.node_count();
        if let Some(&b) = self.b_values().iter().find(|&&b| b >= n) {
            return bad(format!("failure count {b} must be below N = {n}"));
        }
        if let Some(k) = self.cascade_k {
            if !(k.is_finite() && k > 0.0) {
                return bad(format!("cascade_k must be positive, got {k}"));
            }
        }
        if self.hop_limit == Some(0) {
            return bad("hop_limit must be positive".into());
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be >= 1".into());
        }
        if self.bin_width == Some(0) {
            return bad("bin_width must be positive".into());
        }
        Ok(())
    }

    /// Canonical text; `parse(to_text())` gives back the same config.
    pub fn to_text(&self) -> String {
        fn list<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        fn or_auto<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "auto".into(), T::to_string)
        }
        let mut out = format!("{CONFIG_HEADER}\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("size", self.size.to_string());
        kv("kind", self.kind.to_string());
        kv("alpha", self.alpha.to_string());
        kv(
            "ibt_lengths",
            self.ibt_lengths
                .iter()
                .map(|(a, b)| format!("{a}:{b}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("ibt_scheme", self.ibt_scheme.to_string());
        kv("samples", self.samples.to_string());
        kv("repetitions", self.repetitions.to_string());
        match &self.failures {
            FailureCounts::Counts(c) => kv("b", list(c)),
            FailureCounts::Fractions(f) => kv("b_fractions", list(f)),
        }
        kv("level", self.level.to_string());
        kv("hop_limit", or_auto(&self.hop_limit));
        kv(
            "cascade_k",
            self.cascade_k
                .map_or_else(|| "none".into(), |k| k.to_string()),
        );
        kv("max_rounds", self.max_rounds.to_string());
        kv("messages", self.messages.to_string());
        kv("seed", self.seed.to_string());
        kv("selection", self.selection.as_str().into());
        kv("bin_width", or_auto(&self.bin_width));
        out
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn hash_hex(&self) -> String {
        Sha256::digest(self.to_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_onto(ExperimentConfig::default(), text)
    }

    /// Like [`parse`](Self::parse) but keys left out keep the values of `base`.
    pub fn parse_onto(base: ExperimentConfig, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let header = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match header {
            Some((_, CONFIG_HEADER)) => {}
            Some((line, other)) => {
                return Err(Error::Config {
                    line,
                    msg: format!("expected header `{CONFIG_HEADER}`, got `{other}`"),
                })
            }
            None => {
                return Err(Error::Config {
                    line: 1,
                    msg: format!("missing header `{CONFIG_HEADER}`"),
                })
            }
        }
        let mut cfg = base;
        let mut seen: Vec<&str> = Vec::new();
        for (line, l) in lines {
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Config { line, msg };
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{l}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let canonical = match key {
                "b" | "b_fractions" => "b",
                k => k,
            };
            if seen.contains(&canonical) {
                return Err(err(format!("`{key}` given more than once")));
            }
            cfg.set(key, value).map_err(err)?;
            seen.push(canonical);
        }
        Ok(cfg)
    }

    /// Sets one key from its text form; the CLI uses the same names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| format!("bad {key} `{v}`: {e}"))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',').map(|x| num(key, x.trim())).collect()
        }
        fn auto<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            if v == "auto" {
                Ok(None)
            } else {
                num(key, v).map(Some)
            }
        }
        match key {
            "size" => self.size = num(key, value)?,
            "kind" => self.kind = value.parse()?,
            "alpha" => self.alpha = finite(num(key, value)?, key)?,
            "ibt_lengths" => {
                self.ibt_lengths = value
                    .split(',')
                    .map(|pair| {
                        let (a, b) = pair.trim().split_once(':').ok_or_else(|| {
                            format!("ibt_lengths entries are `s1:s2`, got `{pair}`")
                        })?;
                        Ok((num(key, a)?, num(key, b)?))
                    })
                    .collect::<Result<_, String>>()?
            }
            "ibt_scheme" => self.ibt_scheme = value.parse()?,
            "samples" => self.samples = num(key, value)?,
            "repetitions" => self.repetitions = num(key, value)?,
            "b" => self.failures = FailureCounts::Counts(list(key, value)?),
            "b_fractions" => {
                let f: Vec<f64> = list(key, value)?;
                for &x in &f {
                    finite(x, key)?;
                }
                self.failures = FailureCounts::Fractions(f)
            }
            "level" => self.level = value.parse()?,
            "hop_limit" => self.hop_limit = auto(key, value)?,
            "cascade_k" => {
                self.cascade_k = match value {
                    "none" => None,
                    v => Some(finite(num(key, v)?, key)?),
                }
            }
            "max_rounds" => self.max_rounds = num(key, value)?,
            "messages" => self.messages = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "selection" => self.selection = value.parse()?,
            "bin_width" => self.bin_width = auto(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

fn finite(x: f64, key: &str) -> Result<f64, String> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{key} must be finite"))
    }
}
