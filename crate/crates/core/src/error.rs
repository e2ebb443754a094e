use alloc::boxed::Box;
use alloc::string::String;

use crate::fit::MvGammaFit;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The MGF argument lies outside the convergence domain.
    #[error("argument outside the MGF convergence domain: {0}")]
    Domain(String),
    #[error("tensors do not commute: relative asymmetry {asymmetry:.3e} exceeds {tolerance:.1e}")]
    Commutation { asymmetry: f64, tolerance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sampling requires 2κ to be an integer >= 3, got κ = {0}")]
    UnsupportedShape(f64),
    #[error("sampling requires Ψ·Θ to be positive semidefinite (smallest eigenvalue {0:.3e})")]
    UnsupportedNoncentrality(f64),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("rank-deficient design: rank {rank}, need {required}")]
    Rank { rank: usize, required: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("all components are isotropic; order parameter undefined")]
    Isotropic,
    #[error("infeasible phantom: {0}")]
    Infeasible(String),
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    /// No start of the nonlinear fit met the stopping tolerances. The best
    /// fit found is still returned for reporting.
    #[error("fit did not converge (best residual norm {:.3e})", .0.residual_norm)]
    NotConverged(Box<MvGammaFit>),
}
