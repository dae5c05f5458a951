//! CSV series behind each figure, written as `figN/<kind>.csv` plus a
//! `figN/manifest`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{
    cascade_params, failure_stream, select_kind, sweep, ExperimentConfig, Selection, SweepReport,
    SweepRow,
};
use crate::error::{Error, Result};
use crate::failure::{inject_failures, FailureScenario};
use crate::metrics::{evaluate, load_histogram, MessageSet};
use crate::topology::NetworkKind;

const FIGURE_5_DEFAULT_K: f64 = 3.0;
/// Target bin count per histogram panel when the width is automatic.
const AUTO_BINS: u64 = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub figure: u8,
    /// `(path relative to the output directory, contents)`.
    pub files: Vec<(String, String)>,
    /// False when some cascade hit its round cap.
    pub terminated: bool,
}

impl FigureOutput {
    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (rel, contents) in &self.files {
            let path = out_dir.join(rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Reuses selections and sweeps across figures of one configuration.
pub struct Figures<'a> {
    config: &'a ExperimentConfig,
    selections: Vec<(NetworkKind, Selection)>,
    sweeps: Vec<(NetworkKind, bool, SweepReport)>,
}

fn value_column(figure: u8) -> &'static str {
    match figure {
        1 => "u_over_M",
        2 => "l2",
        3 => "f_max",
        _ => "overload_fraction",
    }
}

fn pick(figure: u8, row: &SweepRow) -> String {
    let s = match figure {
        1 => Some(row.u_over_m),
        2 => row.l2,
        3 => Some(row.f_max),
        _ => row.overload,
    };
    s.map_or_else(|| "NA,NA".into(), |s| format!("{},{}", s.mean, s.rms))
}

impl<'a> Figures<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Figures {
            config,
            selections: Vec::new(),
            sweeps: Vec::new(),
        })
    }

    pub fn selection(&mut self, kind: NetworkKind) -> Result<&Selection> {
        if let Some(i) = self.selections.iter().position(|(k, _)| *k == kind) {
            return Ok(&self.selections[i].1);
        }
        let s = select_kind(self.config, kind)?;
        self.selections.push((kind, s));
        Ok(&self.selections.last().expect("just pushed").1)
    }

    fn reference_f_max(&mut self) -> Result<u64> {
        Ok(self.selection(NetworkKind::Ibt)?.intact.report.f_max)
    }

    /// Sweep of `kind`; a cascading sweep also serves non-cascading requests.
    pub fn sweep(&mut self, kind: NetworkKind, with_cascade: bool) -> Result<&SweepReport> {
        let hit = self
            .sweeps
            .iter()
            .position(|(k, c, _)| *k == kind && (*c || !with_cascade));
        if let Some(i) = hit {
            return Ok(&self.sweeps[i].2);
        }
        let params = if with_cascade {
            let mut c = self.config.clone();
            c.cascade_k.get_or_insert(FIGURE_5_DEFAULT_K);
            let reference = self.reference_f_max()?;
            cascade_params(&c, reference)?
        } else {
            None
        };
        self.selection(kind)?;
        let selected = &self
            .selections
            .iter()
            .find(|(k, _)| *k == kind)
            .expect("selected above")
            .1;
        let report = sweep(self.config, selected, params.as_ref())?;
        self.sweeps.push((kind, with_cascade, report));
        Ok(&self.sweeps.last().expect("just pushed").2)
    }

    pub fn reproduce(&mut self, figure: u8) -> Result<FigureOutput> {
        let kinds: &[NetworkKind] = match figure {
            1..=3 => &[NetworkKind::Stochastic, NetworkKind::Ibt],
            4 => &[
                NetworkKind::Stochastic,
                NetworkKind::Ibt,
                NetworkKind::Torus,
            ],
            5 => &[
                NetworkKind::Stochastic,
                NetworkKind::StochasticFixedDegree,
                NetworkKind::Ibt,
            ],
            _ => {
                return Err(Error::InvalidParams(format!(
                    "figure must be 1 to 5, got {figure}"
                )))
            }
        };
        let dir = format!("fig{figure}");
        let mut files = Vec::new();
        let mut terminated = true;
        let series = if figure == 4 {
            self.histograms(kinds)?
        } else {
            let mut out = Vec::new();
            for &kind in kinds {
                let report = self.sweep(kind, figure == 5)?;
                terminated &= report.all_terminated();
                out.push((kind, self.series_csv(figure, kind)?));
            }
            out
        };
        for (kind, csv) in series {
            files.push((format!("{dir}/{kind}.csv"), csv));
        }
        let manifest = self.manifest(figure, kinds, &files)?;
        files.push((format!("{dir}/manifest"), manifest));
        Ok(FigureOutput {
            figure,
            files,
            terminated,
        })
    }

    fn header(&self, kind: NetworkKind, s: &Selection) -> String {
        format!(
            "# kind={kind} L={} selected={} hop_limit={} config_sha256={}\n",
            self.config.size,
            s.id,
            s.policy.hop_limit,
            self.config.hash_hex()
        )
    }

    fn series_csv(&mut self, figure: u8, kind: NetworkKind) -> Result<String> {
        let header = self.header(
            kind,
            self.selections
                .iter()
                .find(|(k, _)| *k == kind)
                .map(|(_, s)| s)
                .expect("swept"),
        );
        let report = self.sweep(kind, figure == 5)?;
        let mut out = header;
        let _ = writeln!(
            out,
            "# repetitions={}; rms = population root-mean-square deviation over repetitions",
            report.repetitions
        );
        if figure == 5 {
            let p = report.cascade.expect("figure 5 sweeps cascade");
            let _ = writeln!(
                out,
                "# f_th={} k={} reference_f_max={}; overload fraction excludes the b initial failures",
                p.threshold,
                p.assurance_factor.unwrap_or(f64::NAN),
                p.reference_f_max.unwrap_or(0)
            );
        }
        let col = value_column(figure);
        let _ = writeln!(out, "b,b_over_N,{col}_mean,{col}_rms");
        for row in &report.rows {
            let _ = writeln!(out, "{},{},{}", row.b, row.fraction, pick(figure, row));
        }
        Ok(out)
    }

    /// Load histograms of the first failure draw at each `b`. Panels share a
    /// bin width across kinds.
    fn histograms(&mut self, kinds: &[NetworkKind]) -> Result<Vec<(NetworkKind, String)>> {
        let config = self.config;
        let mut loads = Vec::new();
        for &kind in kinds {
            let s = self.selection(kind)?.clone();
            let mut per_b = Vec::new();
            for b in config.b_values() {
                let table = if b == 0 {
                    s.intact.loads.clone()
                } else {
                    let scenario = FailureScenario {
                        failed: b,
                        seed: config.seed,
                        stream: failure_stream(b, 0),
                    };
                    let damaged = inject_failures(&s.network, &scenario)?;
                    evaluate(
                        &damaged,
                        &MessageSet::new(&damaged, config.messages),
                        &s.policy,
                    )
                    .loads
                };
                per_b.push((b, table));
            }
            loads.push((kind, s, per_b));
        }
        let panels = config.b_values().len();
        let widths: Vec<u64> = (0..panels)
            .map(|i| {
                config.bin_width.unwrap_or_else(|| {
                    let top = loads
                        .iter()
                        .map(|(_, _, per_b)| per_b[i].1.alive_loads().max().unwrap_or(0))
                        .max()
                        .unwrap_or(0);
                    top.div_ceil(AUTO_BINS).max(1)
                })
            })
            .collect();
        let mut out = Vec::new();
        for (kind, s, per_b) in &loads {
            let mut csv = self.header(*kind, s);
            csv.push_str("# first failure draw per b; load_bin_hi is exclusive\n");
            csv.push_str("b,load_bin_lo,load_bin_hi,count\n");
            for ((b, table), &w) in per_b.iter().zip(&widths) {
                for row in load_histogram(table, w).csv_rows() {
                    let _ = writeln!(csv, "{b},{row}");
                }
            }
            out.push((*kind, csv));
        }
        Ok(out)
    }

    fn manifest(
        &mut self,
        figure: u8,
        kinds: &[NetworkKind],
        files: &[(String, String)],
    ) -> Result<String> {
        let c = self.config;
        let mut m = String::from("swnet-manifest v1\n");
        let _ = writeln!(m, "figure = {figure}");
        let _ = writeln!(m, "config_sha256 = {}", c.hash_hex());
        let _ = writeln!(m, "seed = {}", c.seed);
        let _ = writeln!(m, "messages = {}", c.messages);
        let _ = writeln!(
            m,
            "b = {}",
            c.b_values()
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(m, "failure_streams = (b << 32) | repetition");
        for &kind in kinds {
            let s = self.selection(kind)?;
            let _ = writeln!(m, "{kind}.selected = {}", s.id);
            let _ = writeln!(
                m,
                "{kind}.intact = l2 {} f_max {} nav_diameter {} hop_limit {}",
                s.intact.report.l2.map_or("NA".into(), |x| x.to_string()),
                s.intact.report.f_max,
                s.nav_diameter,
                s.policy.hop_limit
            );
        }
        if figure == 5 {
            let _ = writeln!(m, "reference_f_max = {}", self.reference_f_max()?);
        }
        let names: Vec<&str> = files.iter().map(|(p, _)| p.as_str()).collect();
        let _ = writeln!(m, "files = {}", names.join(","));
        Ok(m)
    }
}

/// One-shot form of [`Figures::reproduce`].
pub fn reproduce_figure(config: &ExperimentConfig, figure: u8) -> Result<FigureOutput> {
    Figures::new(config)?.reproduce(figure)
}
