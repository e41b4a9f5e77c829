use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::sim::{ControlVector, State};

use super::config::{PlannerConfig, PlannerKind};
use super::ilqg::ilqg_plan;
use super::objective::Objective;
use super::plan::{horizon_steps, Plan};
use super::rollout::clamp_to_limits;
use super::sampling::sampling_plan;
use super::PlanOutcome;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentStats {
    pub planner_calls: usize,
    pub planner_iterations: usize,
    /// Planner call indices whose plan came back degraded.
    pub degraded_calls: Vec<usize>,
}

/// Receding-horizon controller: replans every control step from the newest state, warm-started
/// with the previous plan shifted by one step, and emits the first control.
#[derive(Debug, Clone)]
pub struct Agent {
    pub config: PlannerConfig,
    plan: Option<Plan>,
    rng: ChaCha8Rng,
    pub stats: AgentStats,
    pub last_outcome: Option<PlanOutcome>,
}

impl Agent {
    pub fn new(config: PlannerConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, plan: None, rng: ChaCha8Rng::seed_from_u64(seed), stats: AgentStats::default(), last_outcome: None })
    }

    pub fn plan(&self) -> Option<&Plan> {
        self.plan.as_ref()
    }

    fn initial_plan(&self, dt: f64, nu: usize) -> Result<Plan> {
        match self.config.kind {
            PlannerKind::Ilqg => {
                let steps = horizon_steps(self.config.horizon_s, dt);
                Plan::zeros(steps as f64 * dt, steps + 1, nu)
            }
            PlannerKind::Sampling => Plan::zeros(self.config.horizon_s, self.config.knots, nu),
        }
    }

    fn emit(&self, objective: &dyn Objective, plan: &Plan, state: &State) -> ControlVector {
        let mut u = plan.sample(0.0);
        if self.config.feedback {
            if let (Some(gains), Some(nominal)) = (&plan.gains, &plan.nominal) {
                if let (Some(k), Some(x0)) = (gains.first(), nominal.first()) {
                    u += k * (state.to_vector() - x0.to_vector());
                }
            }
        }
        clamp_to_limits(objective, &u)
    }

    /// One receding-horizon step: plan from `state` and return the control to apply now.
    pub fn step(&mut self, objective: &dyn Objective, state: &State) -> Result<ControlVector> {
        let model = objective.model();
        let warm = match &self.plan {
            Some(p) => p.shifted(model.control_dt),
            None => self.initial_plan(model.control_dt, model.nu())?,
        };
        let outcome = match self.config.kind {
            PlannerKind::Ilqg => ilqg_plan(objective, state, &warm, &self.config)?,
            PlannerKind::Sampling => sampling_plan(objective, state, &warm, &self.config, &mut self.rng)?,
        };
        let call = self.stats.planner_calls;
        self.stats.planner_calls += 1;
        self.stats.planner_iterations += outcome.iterations;
        let control = if outcome.degraded {
            self.stats.degraded_calls.push(call);
            let u = self.emit(objective, &warm, state);
            self.plan = Some(warm);
            u
        } else {
            let u = self.emit(objective, &outcome.plan, state);
            self.plan = Some(outcome.plan.clone());
            u
        };
        self.last_outcome = Some(outcome);
        Ok(control)
    }
}
