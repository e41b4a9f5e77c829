use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::tasks::str_enum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Ilqg,
    Sampling,
}

str_enum!(PlannerKind { Ilqg => "ilqg", Sampling => "sampling" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    pub horizon_s: f64,
    /// Outer iterations per planning call; fixed, never a wall-clock budget.
    pub iterations: usize,
    pub regularization_init: f64,
    pub regularization_scale: f64,
    pub regularization_min: f64,
    pub regularization_max: f64,
    /// Step sizes tried by the iLQG line search: 1, 1/2, ... , 2^-(n-1).
    pub line_search_steps: usize,
    /// Apply iLQG feedback gains to the emitted control.
    pub feedback: bool,
    pub candidates: usize,
    /// Sampling noise standard deviation as a fraction of each actuator's full range.
    pub noise_scale: f64,
    pub knots: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            kind: PlannerKind::Ilqg,
            horizon_s: 0.35,
            iterations: 2,
            regularization_init: 1e-6,
            regularization_scale: 10.0,
            regularization_min: 1e-6,
            regularization_max: 1e10,
            line_search_steps: 11,
            feedback: true,
            candidates: 32,
            noise_scale: 0.1,
            knots: 5,
        }
    }
}

impl PlannerConfig {
    pub fn sampling() -> Self {
        Self { kind: PlannerKind::Sampling, horizon_s: 0.5, iterations: 5, noise_scale: 0.015, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_s > 0.0) {
            return Err(contract("planning horizon must be positive"));
        }
        if self.iterations < 1 {
            return Err(contract("planner needs at least one iteration"));
        }
        match self.kind {
            PlannerKind::Ilqg => {
                if !(self.regularization_scale > 1.0)
                    || !(self.regularization_min >= 0.0)
                    || !(self.regularization_max >= self.regularization_min)
                    || !(self.regularization_init >= self.regularization_min)
                {
                    return Err(contract("inconsistent iLQG regularization schedule"));
                }
                if self.line_search_steps < 1 {
                    return Err(contract("line search needs at least one step size"));
                }
            }
            PlannerKind::Sampling => {
                if self.candidates < 2 || self.knots < 2 {
                    return Err(contract("sampling needs at least two candidates and two knots"));
                }
                if !(self.noise_scale >= 0.0) {
                    return Err(contract("noise scale must be non-negative"));
                }
            }
        }
        Ok(())
    }
}
