use thiserror::Error;

/// Errors surfaced by network construction, parsing and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("no admissible shortcut partner for node {node}")]
    NoAdmissiblePartner { node: u32 },

    #[error("stub matching deadlocked in all {restarts} attempts")]
    MatchingExhausted { restarts: usize },

    #[error("network text, line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config, line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(
        "intact network failed to deliver {undelivered} message(s), first {source_node}->{dest}"
    )]
    Undeliverable {
        undelivered: u64,
        source_node: u32,
        dest: u32,
    },

    #[error("cannot fail {requested} nodes out of {alive} alive")]
    TooManyFailures { requested: usize, alive: usize },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
