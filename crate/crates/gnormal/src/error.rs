//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The mesh ratio violates the active stability bound.
    #[error("CFL violated: {cfl:.3} > {bound}")]
    CflViolation { cfl: f64, bound: f64 },

    /// Expression syntax error, reported at a byte offset of the input.
    #[error("parse error at byte {offset}: expected {}", expected.join(" | "))]
    Parse {
        offset: usize,
        expected: Vec<&'static str>,
    },

    #[error("unknown builtin payoff `{0}`")]
    UnknownBuiltin(String),

    /// A lattice entry became NaN or infinite (e.g. a payoff with a pole
    /// evaluated on the grid; domain errors surface here at solve time).
    #[error("non-finite value at level {level}, node {node}")]
    NonFiniteValue { level: usize, node: i64 },

    /// Forward mass went negative; unreachable when the CFL bound holds.
    #[error("negative mass at level {level}, node {node}")]
    NegativeMass { level: usize, node: i64 },

    #[error("index outside lattice: level {level}, node {node}")]
    IndexOutOfLattice { level: usize, node: i64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("window [{lo}, {hi}] not covered by the reference table")]
    WindowOutOfRange { lo: f64, hi: f64 },

    #[error("per-level history missing; rerun propagation with keep_history")]
    HistoryMissing,
}

pub type Result<T> = std::result::Result<T, Error>;
