//! Optimization engine: linear programs and `p`-norm minimization.

mod lp;
mod pnorm;

pub use lp::{solve_lp, LinearProgram, Row, Sense};
pub use pnorm::{solve_pnorm_general, solve_pnorm_min, PnormOptions, PnormRow};

/// Primal feasibility tolerance, relative to `1 + ‖b‖∞`.
pub const TOL_FEAS: f64 = 1e-9;
/// Relative duality gap accepted at an LP optimum.
pub const TOL_GAP: f64 = 1e-8;
/// Relative accuracy targeted by the `p > 1` methods.
pub const TOL_PNORM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Proof attached to a non-optimal outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Row multipliers `y` (sign-correct for each row sense) with `Aᵀy ≤ 0`
    /// and `yᵀb > 0`.
    Farkas { y: Vec<f64> },
    /// A feasible direction `d ≥ 0` along which the objective decreases.
    Ray { direction: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// Largest constraint or bound violation of the primal point.
    pub primal: f64,
    /// Largest sign or reduced-cost violation of the dual point.
    pub dual: f64,
    /// Relative primal/dual objective gap.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    /// Objective value; `None` unless the status is optimal.
    pub objective: Option<f64>,
    pub residuals: Residuals,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
}

impl SolveOutcome {
    pub(crate) fn infeasible(n: usize, iterations: usize, y: Vec<f64>) -> Self {
        SolveOutcome {
            status: SolveStatus::Infeasible,
            primal: vec![0.0; n],
            dual: Vec::new(),
            objective: None,
            residuals: Residuals::default(),
            certificate: Some(Certificate::Farkas { y }),
            iterations,
        }
    }

    pub(crate) fn unbounded(n: usize, iterations: usize, direction: Vec<f64>) -> Self {
        SolveOutcome {
            status: SolveStatus::Unbounded,
            primal: vec![0.0; n],
            dual: Vec::new(),
            objective: None,
            residuals: Residuals::default(),
            certificate: Some(Certificate::Ray { direction }),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
