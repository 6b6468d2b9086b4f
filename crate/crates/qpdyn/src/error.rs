//! Error type shared by every module in the crate.

use std::fmt;

/// Errors produced by validation, solvers, fitting, and file I/O.
#[derive(Debug, Clone, PartialEq)]
pub enum QpError {
    /// A parameter container violated one of its invariants.
    InvalidParameter {
        field: &'static str,
        reason: String,
    },
    /// An operation was called with arguments outside its domain.
    InvalidInput(String),
    /// The explicit diffusion update produced a non-finite value.
    InstabilityDetected {
        cell: (usize, usize),
        time: f64,
    },
    /// Adaptive quadrature could not reach the requested tolerance.
    QuadratureFailure {
        requested_rtol: f64,
        achieved_rtol: f64,
    },
    /// An iterative solver hit its iteration cap without meeting
    /// its convergence test.
    NonConvergence(String),
    /// A monotone decay could not be extracted from the input curve.
    DecayNotObserved,
    /// Malformed input data (CSV parse errors carry a line number).
    Malformed {
        line: Option<usize>,
        reason: String,
    },
    /// Wrapped I/O error.
    Io(String),
}

impl fmt::Display for QpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QpError::InvalidParameter { field, reason } => {
                write!(f, "invalid parameter `{field}`: {reason}")
            }
            QpError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            QpError::InstabilityDetected { cell, time } => write!(
                f,
                "instability detected at cell ({}, {}) at t = {:.6e} s",
                cell.0, cell.1, time
            ),
            QpError::QuadratureFailure {
                requested_rtol,
                achieved_rtol,
            } => write!(
                f,
                "quadrature did not converge: requested rtol {requested_rtol:.1e}, achieved {achieved_rtol:.1e}"
            ),
            QpError::NonConvergence(msg) => write!(f, "did not converge: {msg}"),
            QpError::DecayNotObserved => write!(f, "decay not observed"),
            QpError::Malformed { line, reason } => match line {
                Some(n) => write!(f, "malformed input at line {n}: {reason}"),
                None => write!(f, "malformed input: {reason}"),
            },
            QpError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for QpError {}

impl From<std::io::Error> for QpError {
    fn from(e: std::io::Error) -> Self {
        QpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QpError>;
