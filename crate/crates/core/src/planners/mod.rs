//! Receding-horizon planners: iLQG and predictive sampling over a shared [`Objective`].

mod agent;
mod config;
mod ilqg;
mod objective;
mod plan;
mod rollout;
mod sampling;

pub use agent::{Agent, AgentStats};
pub use config::{PlannerConfig, PlannerKind};
pub use ilqg::ilqg_plan;
pub use objective::{cost_expansion, Objective};
pub use plan::{horizon_steps, Plan};
pub use rollout::{rollout, Rollout};
pub use sampling::sampling_plan;

/// A planner's answer plus the bookkeeping the invariants are checked against.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub plan: Plan,
    /// Rollout cost of the returned plan.
    pub cost: f64,
    /// Rollout cost of the warm start / nominal handed in.
    pub initial_cost: f64,
    /// Costs of each accepted improvement, in order.
    pub accepted_costs: Vec<f64>,
    /// The planner could not produce a usable plan and handed back its input.
    pub degraded: bool,
    pub iterations: usize,
}
