use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("courant violation: dt = {dt} must be below the Courant limit {limit} for dx = {dx}, dy = {dy}")]
    Courant { dt: f64, limit: f64, dx: f64, dy: f64 },
    #[error("tiling mismatch: n{axis} = {cells} is not divisible by tile_n{axis} = {tile}")]
    TilingMismatch { axis: char, cells: usize, tile: usize },
    #[error("tile too small: tile_n{axis} = {tile} must be at least 2 cells")]
    TileTooSmall { axis: char, tile: usize },
    #[error("guard too small: guard = {guard} must be at least 2")]
    GuardTooSmall { guard: usize },
    #[error("grid must have at least one cell per axis (nx = {nx}, ny = {ny})")]
    EmptyGrid { nx: usize, ny: usize },
    #[error("cell sizes and time step must be positive and finite (dx = {dx}, dy = {dy}, dt = {dt})")]
    NonPositive { dx: f64, dy: f64, dt: f64 },
    #[error("species `{name}`: {reason}")]
    Species { name: String, reason: String },
}

/// Every invariant a configuration violates, in check order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigViolation>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for v in &self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A deck syntax problem at a 1-based line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub msg: String,
}

/// Every syntax problem found in a deck, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<LineError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "line {}: {}", e.line, e.msg)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Parse(#[from] ParseErrors),
    #[error("particle moved {carry} cells along {axis} in one step (Courant breach)")]
    CourantBreach { axis: char, carry: i64 },
    #[error("sort invariant violated: {0}")]
    SortInvariant(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("report format: {0}")]
    Format(#[from] crate::report::FormatError),
    #[error("step {step}: {source}")]
    Step {
        step: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Process exit codes of the `tpic` binary.
pub mod exit {
    pub const OK: u8 = 0;
    /// Bad command line.
    pub const USAGE: u8 = 2;
    /// Deck syntax error.
    pub const PARSE: u8 = 3;
    /// Deck parsed but the configuration is invalid.
    pub const CONFIG: u8 = 4;
    /// File system error.
    pub const IO: u8 = 5;
    /// Malformed report file.
    pub const FORMAT: u8 = 6;
    /// The simulation aborted.
    pub const RUNTIME: u8 = 7;
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidArgument(_) | Error::Usage(_) | Error::Unsupported(_) => exit::USAGE,
            Error::Parse(_) => exit::PARSE,
            Error::Config(_) => exit::CONFIG,
            Error::Io(_) => exit::IO,
            Error::Format(crate::report::FormatError::Io(_)) => exit::IO,
            Error::Format(_) => exit::FORMAT,
            Error::CourantBreach { .. } | Error::SortInvariant(_) => exit::RUNTIME,
            Error::Step { source, .. } => match source.exit_code() {
                exit::IO => exit::IO,
                _ => exit::RUNTIME,
            },
        }
    }
}
