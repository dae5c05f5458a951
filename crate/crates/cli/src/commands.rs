use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use swnet::failure::{cascade_from, inject_failures, CascadeParams, FailureScenario};
use swnet::harness::{
    cascade_params, ibt_reference, select_best_sample, sweep, ExperimentConfig, FailureCounts,
    Figures,
};
use swnet::metrics::{
    evaluate, global_average_distance, load_histogram, Histogram, MessageSet, MetricsReport,
};
use swnet::routing::{navigation_diameter, NavigationPolicy};
use swnet::topology::Network;

use crate::args::{Cli, Command, NetworkArgs, Preset, Shared, OUT_ENV};

/// Default directory for `figure` when neither `--out` nor `$SWNET_OUT` is set.
const FIGURE_DIR: &str = "swnet-out";
/// Histogram bins when the width is automatic.
const AUTO_BINS: u64 = 50;

pub enum Outcome {
    Done,
    /// Completed, but with a condition the caller should see in the exit code.
    Flagged(String),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Sim(swnet::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Sim(swnet::Error::Undeliverable { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Sim(e) => e.fmt(f),
        }
    }
}

impl From<swnet::Error> for CliError {
    fn from(e: swnet::Error) -> Self {
        CliError::Sim(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Sim(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let threads = match &cli.command {
        Command::Generate(s) | Command::Sweep(s) => s.threads,
        Command::Diameter(n) => n.shared.threads,
        Command::Evaluate(e) => e.net.shared.threads,
        Command::Cascade(c) => c.net.shared.threads,
        Command::Figure(f) => f.shared.threads,
    };
    match threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate(s) => generate(&s),
        Command::Evaluate(e) => evaluate_cmd(&e.net, e.distance),
        Command::Diameter(n) => diameter(&n),
        Command::Sweep(s) => sweep_cmd(&s),
        Command::Cascade(c) => cascade_cmd(&c.net, c.failed, c.threshold),
        Command::Figure(f) => figure(&f.shared, &f.figures),
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| usage(format!("bad {flag} entry `{x}`: {e}")))
        })
        .collect()
}

/// Defaults, then preset, then config file, then flags. Commands working on
/// a single network default to one sample.
fn resolve(s: &Shared, single_network: bool) -> Result<ExperimentConfig> {
    let mut c = match s.preset {
        Some(Preset::Full) => ExperimentConfig::full_scale(),
        _ => ExperimentConfig::default(),
    };
    if single_network {
        c.samples = 1;
    }
    if let Some(path) = &s.config {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        c = ExperimentConfig::parse_onto(c, &text)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    if let Some(v) = s.size {
        c.size = v;
    }
    if let Some(v) = s.kind {
        c.kind = v;
    }
    if let Some(v) = s.alpha {
        if !v.is_finite() {
            return Err(usage("--alpha must be finite"));
        }
        c.alpha = v;
    }
    if let (Some(s1), Some(s2)) = (s.s1, s.s2) {
        c.ibt_lengths = vec![(s1, s2)];
    }
    if let Some(v) = s.scheme {
        c.ibt_scheme = v;
    }
    if let Some(v) = s.seed {
        c.seed = v;
    }
    if let Some(v) = s.messages {
        c.messages = v;
    }
    if let Some(v) = s.level {
        c.level = v;
    }
    if let Some(v) = s.samples {
        c.samples = v;
    }
    if let Some(v) = s.repetitions {
        c.repetitions = v;
    }
    if let Some(v) = &s.b {
        c.failures = FailureCounts::Counts(parse_list("--b", v)?);
    }
    if let Some(v) = &s.b_fractions {
        c.failures = FailureCounts::Fractions(parse_list("--b-fractions", v)?);
    }
    if let Some(v) = s.hop_limit {
        c.hop_limit = Some(v);
    }
    if let Some(v) = s.cascade_k {
        c.cascade_k = Some(v);
    }
    if let Some(v) = s.max_rounds {
        c.max_rounds = v;
    }
    if let Some(v) = s.bin_width {
        c.bin_width = Some(v);
    }
    c.validate().map_err(|e| usage(e.to_string()))?;
    Ok(c)
}

fn announce(c: &ExperimentConfig, extra: &[(&str, String)]) {
    let mut text = String::from("# resolved config\n");
    text.push_str(&c.to_text());
    for (k, v) in extra {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    eprint!("{text}");
}

/// `--out`, else `$SWNET_OUT`. The flag says whether it came from `--out`.
fn out_target(s: &Shared) -> Option<(PathBuf, bool)> {
    s.out
        .clone()
        .map(|p| (p, true))
        .or_else(|| std::env::var_os(OUT_ENV).map(|p| (PathBuf::from(p), false)))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Writes `name` under the output directory, or prints to standard output.
fn emit(s: &Shared, name: &str, contents: &str) -> Result<()> {
    match out_target(s) {
        Some((dir, _)) => write_file(&dir.join(name), contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn generate(s: &Shared) -> Result<Outcome> {
    let c = resolve(s, true)?;
    announce(&c, &[]);
    let sel = select_best_sample(&c)?;
    eprintln!("selected {}", sel.id);
    let text = sel.network.to_text();
    match out_target(s) {
        Some((path, true)) => write_file(&path, &text)?,
        Some((dir, false)) => write_file(&dir.join(format!("{}-L{}.txt", c.kind, c.size)), &text)?,
        None => print!("{text}"),
    }
    Ok(Outcome::Done)
}

fn load(args: &NetworkArgs, c: &mut ExperimentConfig) -> Result<Option<Network>> {
    let Some(path) = &args.network else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read network {}: {e}", path.display())))?;
    let net = Network::from_text(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let side = net.config().side();
    if args.shared.size.is_some_and(|l| l != side) {
        return Err(usage(format!(
            "--size {} disagrees with the network file (L = {side})",
            c.size
        )));
    }
    // the file fixes the lattice
    c.size = side;
    c.kind = net.kind();
    Ok(Some(net))
}

/// The loaded network or the best generated sample, with the navigation
/// diameter of its intact form.
fn obtain(loaded: Option<Network>, c: &ExperimentConfig) -> Result<(Network, u32)> {
    match loaded {
        Some(net) => {
            let d2 = navigation_diameter(&net.intact(), c.level)?;
            Ok((net, d2))
        }
        None => {
            let sel = select_best_sample(c)?;
            eprintln!("selected {}", sel.id);
            Ok((sel.network, sel.nav_diameter))
        }
    }
}

fn policy_for(c: &ExperimentConfig, d2: u32) -> NavigationPolicy {
    match c.hop_limit {
        Some(h) => NavigationPolicy::new(c.level, h),
        None => NavigationPolicy::from_diameter(c.level, d2),
    }
}

fn network_extra(args: &NetworkArgs) -> Vec<(&'static str, String)> {
    args.network
        .iter()
        .map(|p| ("network", p.display().to_string()))
        .collect()
}

fn evaluate_cmd(args: &NetworkArgs, distance: bool) -> Result<Outcome> {
    let mut c = resolve(&args.shared, true)?;
    let loaded = load(args, &mut c)?;
    announce(&c, &network_extra(args));
    let (net, d2) = obtain(loaded, &c)?;
    let policy = policy_for(&c, d2);
    let eval = evaluate(&net, &MessageSet::new(&net, c.messages), &policy);
    let report = MetricsReport {
        d: if distance {
            global_average_distance(&net).mean()
        } else {
            None
        },
        nav_diameter: Some(d2),
        ..eval.report
    };
    let meta = format!(
        "# kind={} L={} failed={} messages={} level={} hop_limit={}\n",
        net.kind(),
        net.config().side(),
        net.node_count() - net.alive_count(),
        c.messages,
        c.level,
        policy.hop_limit
    );
    let metrics = format!(
        "{meta}{}\n{}\n",
        MetricsReport::csv_header(),
        report.csv_row()
    );
    let width = c
        .bin_width
        .unwrap_or_else(|| report.f_max.div_ceil(AUTO_BINS).max(1));
    let hist = load_histogram(&eval.loads, width);
    let mut hist_csv = format!("{meta}{}\n", Histogram::csv_header());
    for row in hist.csv_rows() {
        hist_csv.push_str(&row);
        hist_csv.push('\n');
    }
    match out_target(&args.shared) {
        Some((dir, _)) => {
            write_file(&dir.join("metrics.csv"), &metrics)?;
            write_file(&dir.join("histogram.csv"), &hist_csv)?;
        }
        None => print!("{metrics}"),
    }
    Ok(Outcome::Done)
}

fn diameter(args: &NetworkArgs) -> Result<Outcome> {
    let mut c = resolve(&args.shared, true)?;
    let loaded = load(args, &mut c)?;
    announce(&c, &network_extra(args));
    let (net, d2) = obtain(loaded, &c)?;
    let csv = format!(
        "# kind={} L={}\nlevel,nav_diameter\n{},{d2}\n",
        net.kind(),
        net.config().side(),
        c.level
    );
    emit(&args.shared, "diameter.csv", &csv)?;
    Ok(Outcome::Done)
}

fn reference_params(c: &ExperimentConfig) -> Result<Option<CascadeParams>> {
    if c.cascade_k.is_none() {
        return Ok(None);
    }
    let reference = ibt_reference(c).map_err(|e| {
        usage(format!(
            "cascade threshold needs the intact iBT reference at L = {}: {e}",
            c.size
        ))
    })?;
    Ok(cascade_params(c, reference)?)
}

fn sweep_cmd(s: &Shared) -> Result<Outcome> {
    let c = resolve(s, false)?;
    announce(&c, &[]);
    let params = reference_params(&c)?;
    let sel = select_best_sample(&c)?;
    eprintln!("selected {}", sel.id);
    let report = sweep(&c, &sel, params.as_ref())?;
    let mut csv = format!(
        "# selected={} hop_limit={} config_sha256={}\n",
        sel.id,
        sel.policy.hop_limit,
        c.hash_hex()
    );
    csv.push_str(&report.to_csv());
    emit(s, &format!("sweep/{}.csv", c.kind), &csv)?;
    if report.all_terminated() {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::Flagged(format!(
            "a cascade did not settle within {} rounds",
            c.max_rounds
        )))
    }
}

fn cascade_cmd(args: &NetworkArgs, failed: usize, threshold: Option<u64>) -> Result<Outcome> {
    let mut c = resolve(&args.shared, true)?;
    let loaded = load(args, &mut c)?;
    if threshold.is_none() && c.cascade_k.is_none() {
        c.cascade_k = Some(3.0);
    }
    let mut extra = network_extra(args);
    extra.push(("failed", failed.to_string()));
    if let Some(t) = threshold {
        extra.push(("threshold", t.to_string()));
    }
    announce(&c, &extra);
    let params = match threshold {
        Some(t) => {
            let mut p = CascadeParams::with_threshold(t).map_err(|e| usage(e.to_string()))?;
            p.max_rounds = c.max_rounds;
            p
        }
        None => reference_params(&c)?.expect("cascade_k set above"),
    };
    let (net, d2) = obtain(loaded, &c)?;
    let policy = policy_for(&c, d2);
    let scenario = FailureScenario::new(failed, c.seed);
    let damaged = inject_failures(&net, &scenario).map_err(|e| usage(e.to_string()))?;
    let report = cascade_from(&damaged, failed, &params, c.messages, &policy, None);
    let mut csv = format!(
        "# kind={} L={} failed={failed} f_th={} overload_failed={} terminated={}\n",
        net.kind(),
        net.config().side(),
        params.threshold,
        report.overload_failed,
        report.terminated
    );
    csv.push_str(&report.trace_csv());
    emit(&args.shared, "cascade.csv", &csv)?;
    if report.terminated {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::Flagged(format!(
            "cascade did not settle within {} rounds",
            params.max_rounds
        )))
    }
}

fn figure(s: &Shared, figures: &[u8]) -> Result<Outcome> {
    let c = resolve(s, false)?;
    announce(&c, &[]);
    let dir = out_target(s).map_or_else(|| PathBuf::from(FIGURE_DIR), |(d, _)| d);
    let all = [1, 2, 3, 4, 5];
    let ids = if figures.is_empty() {
        &all[..]
    } else {
        figures
    };
    let mut runner = Figures::new(&c)?;
    let mut flagged = false;
    for &id in ids {
        let out = runner.reproduce(id)?;
        for p in out.write(&dir)? {
            eprintln!("wrote {}", p.display());
        }
        flagged |= !out.terminated;
    }
    if flagged {
        Ok(Outcome::Flagged(format!(
            "a cascade did not settle within {} rounds",
            c.max_rounds
        )))
    } else {
        Ok(Outcome::Done)
    }
}
