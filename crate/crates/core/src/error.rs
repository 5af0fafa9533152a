use alloc::string::String;
use core::fmt;

use crate::sparse::SolveReport;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is out of range or inconsistent with another one.
    Parameter(String),
    /// The nonlinear flow denominator `1 - (p-1)λτ|w|^{p-1}` is not positive.
    BlowUp {
        /// Time step index (1-based) at which the guard fired; 0 for scalar calls.
        step: usize,
        /// Offending node, if the failure happened on a finite-element function.
        node: Option<usize>,
        /// Magnitude `|w|` that violated the guard.
        magnitude: f64,
        /// `T₁ = ((p-1)|w|^{p-1})^{-1}` for the offending magnitude.
        t1_bound: f64,
    },
    /// An iterative solver failed.
    Solver {
        /// What was being solved.
        context: &'static str,
        /// Report of the last linear solve.
        report: SolveReport,
    },
    /// Picard iteration for the fully implicit scheme did not reach its tolerance.
    PicardDivergence {
        /// Step index at which it failed (0 if unknown).
        step: usize,
        /// Iterations performed.
        iterations: usize,
        /// Last relative L² increment.
        last_increment: f64,
    },
    /// A mesh cell has non-positive volume.
    DegenerateCell {
        /// Cell index.
        cell: usize,
        /// Signed volume that was found.
        volume: f64,
    },
    /// A function value is not finite where a finite value is required.
    NonFinite {
        /// Vertex or entry index.
        index: usize,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Attach a time step index to errors that carry one.
    pub fn at_step(self, n: usize) -> Self {
        match self {
            Error::BlowUp { node, magnitude, t1_bound, .. } => Error::BlowUp {
                step: n,
                node,
                magnitude,
                t1_bound,
            },
            Error::PicardDivergence { iterations, last_increment, .. } => Error::PicardDivergence {
                step: n,
                iterations,
                last_increment,
            },
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::BlowUp { step, node, magnitude, t1_bound } => {
                write!(f, "nonlinear flow blow-up at step {step}")?;
                if let Some(node) = node {
                    write!(f, ", node {node}")?;
                }
                write!(f, ": |w| = {magnitude:e}, T1 = {t1_bound:e} for this magnitude")
            }
            Error::Solver { context, report } => write!(
                f,
                "{context}: linear solver failed after {} iterations (relative residual {:e})",
                report.iterations, report.final_residual
            ),
            Error::PicardDivergence { step, iterations, last_increment } => write!(
                f,
                "Picard iteration did not converge at step {step} after {iterations} iterations (last increment {last_increment:e})"
            ),
            Error::DegenerateCell { cell, volume } => {
                write!(f, "degenerate cell {cell} with signed volume {volume:e}")
            }
            Error::NonFinite { index } => write!(f, "non-finite value at index {index}"),
        }
    }
}

impl core::error::Error for Error {}

/// Library result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;
