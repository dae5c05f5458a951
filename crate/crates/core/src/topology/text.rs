//! Plain-text network format.
//!
//! ```text
//! L=<side> kind=<kind>
//! <a> <b>          one line per shortcut, a < b, ascending
//! FAILED
//! <v>              one line per failed node, ascending
//! ```
//!
//! Every line ends in `\n`. The parser only accepts the canonical form, so
//! anything it accepts is written back byte for byte.

use std::fmt::Write as _;

use super::{LatticeConfig, Network, NetworkKind, NodeId, Shortcut};
use crate::error::{Error, Result};

const FAILED_MARKER: &str = "FAILED";

pub(super) fn write(net: &Network) -> String {
    let mut out = String::with_capacity(16 + 12 * net.shortcuts().len());
    let _ = writeln!(out, "L={} kind={}", net.config().side(), net.kind());
    for s in net.shortcuts() {
        let _ = writeln!(out, "{} {}", s.a(), s.b());
    }
    out.push_str(FAILED_MARKER);
    out.push('\n');
    for v in net.failed_nodes() {
        let _ = writeln!(out, "{v}");
    }
    out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Decimal without sign or leading zeros.
fn parse_number(s: &str, line: usize) -> Result<u32> {
    let canonical =
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(err(line, format!("expected a number, got `{s}`")));
    }
    s.parse()
        .map_err(|_| err(line, format!("number `{s}` out of range")))
}

pub(super) fn parse(input: &str) -> Result<Network> {
    if !input.ends_with('\n') {
        return Err(err(0, "input must end with a newline"));
    }
    let mut lines = input[..input.len() - 1]
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let (side, kind) = header
        .strip_prefix("L=")
        .and_then(|rest| rest.split_once(" kind="))
        .ok_or_else(|| err(1, "header must be `L=<side> kind=<kind>`"))?;
    let side = parse_number(side, 1)?;
    let config = LatticeConfig::new(side).map_err(|e| err(1, e.to_string()))?;
    let kind: NetworkKind = kind.parse().map_err(|e: String| err(1, e))?;
    let n = config.node_count() as u32;

    let mut shortcuts: Vec<Shortcut> = Vec::new();
    let mut saw_marker = false;
    for (no, line) in lines.by_ref() {
        if line == FAILED_MARKER {
            saw_marker = true;
            break;
        }
        let (a, b) = line
            .split_once(' ')
            .ok_or_else(|| err(no, "expected `<a> <b>`"))?;
        let (a, b) = (parse_number(a, no)?, parse_number(b, no)?);
        if a >= b {
            return Err(err(no, "shortcut endpoints must satisfy a < b"));
        }
        if b >= n {
            return Err(err(no, format!("node {b} out of range for N={n}")));
        }
        let s = Shortcut::new(NodeId(a), NodeId(b)).unwrap();
        if shortcuts.last().is_some_and(|&prev| prev >= s) {
            return Err(err(no, "shortcuts must be strictly ascending"));
        }
        if config.distance(s.a(), s.b()) < 2 {
            return Err(err(no, "shortcut duplicates a lattice link"));
        }
        shortcuts.push(s);
    }
    if !saw_marker {
        return Err(err(0, "missing FAILED marker"));
    }

    let mut failed: Vec<NodeId> = Vec::new();
    for (no, line) in lines {
        let v = parse_number(line, no)?;
        if v >= n {
            return Err(err(no, format!("node {v} out of range for N={n}")));
        }
        if failed.last().is_some_and(|&p| p.0 >= v) {
            return Err(err(no, "failed nodes must be strictly ascending"));
        }
        failed.push(NodeId(v));
    }

    let net =
        Network::from_shortcuts(config, kind, shortcuts).map_err(|e| err(0, e.to_string()))?;
    Ok(net.with_failed(failed))
}
