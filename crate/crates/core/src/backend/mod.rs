//! MILP solving contract.
//!
//! A backend takes an [`IlpModel`] and returns an integer optimum, optionally
//! with the improving integer solutions it met on the way. Two
//! implementations ship: [`ReferenceBackend`], an exact in-process
//! branch-and-bound for small instances, and [`CommandBackend`], which hands
//! an LP file to an external solver process.

mod external;
pub mod lp;
mod reference;

use std::time::Duration;

pub use external::CommandBackend;
pub use reference::{ReferenceBackend, DEFAULT_CAP};

use crate::error::{Error, Result};
use crate::model::IlpModel;
use crate::subtours::IntegerSolution;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl SolveLimits {
    pub fn new(time_limit_seconds: Option<f64>, node_limit: Option<u64>) -> Result<Self> {
        if let Some(t) = time_limit_seconds {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain(format!("time limit must be positive, got {t}")));
            }
        }
        if node_limit == Some(0) {
            return Err(Error::domain("node limit must be positive"));
        }
        Ok(SolveLimits {
            time_limit: time_limit_seconds.map(Duration::from_secs_f64),
            node_limit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub best_solution: Option<IntegerSolution>,
    pub objective: Option<i64>,
    /// Improving integer-feasible points found during the solve, in order.
    pub incumbents: Vec<IntegerSolution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackendCapabilities {
    pub reports_incumbents: bool,
    pub accepts_warm_start: bool,
    pub deterministic: bool,
}

pub trait Backend: Send + Sync {
    fn name(&self) -> String;

    fn capabilities(&self) -> BackendCapabilities;

    /// Solves `model` to integer optimality. `warm_start` is a Hamiltonian
    /// tour (vertex order) feasible for the model; backends that cannot use
    /// it ignore it.
    fn solve(
        &self,
        model: &IlpModel,
        warm_start: Option<&[usize]>,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn capabilities(&self) -> BackendCapabilities {
        (**self).capabilities()
    }

    fn solve(
        &self,
        model: &IlpModel,
        warm_start: Option<&[usize]>,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome> {
        (**self).solve(model, warm_start, limits)
    }
}
