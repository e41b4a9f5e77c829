use crate::error::{Error, Result};
use crate::sim::{step, ControlVector, State};

use super::objective::Objective;
use super::plan::{horizon_steps, Plan};

#[derive(Debug, Clone)]
pub struct Rollout {
    /// `x_0 ..= x_T`, truncated after a divergence.
    pub states: Vec<State>,
    /// Clamped controls actually applied.
    pub controls: Vec<ControlVector>,
    /// Running costs plus the terminal cost; `+∞` when the simulation diverged.
    pub cost: f64,
    pub diverged: bool,
}

/// Simulate `plan` from `initial` over its horizon and total the cost.
pub fn rollout(objective: &dyn Objective, initial: &State, plan: &Plan) -> Result<Rollout> {
    let dt = objective.model().control_dt;
    let controls = plan.step_controls(horizon_steps(plan.horizon, dt), dt);
    rollout_controls(objective, initial, &controls)
}

pub(crate) fn clamp_to_limits(objective: &dyn Objective, u: &ControlVector) -> ControlVector {
    let mut u = u.clone();
    for (x, a) in u.iter_mut().zip(&objective.model().actuators) {
        *x = x.clamp(-a.limit, a.limit);
    }
    u
}

pub(crate) fn rollout_controls(objective: &dyn Objective, initial: &State, controls: &[ControlVector]) -> Result<Rollout> {
    rollout_with(objective, initial, controls.len(), |t, _| Ok(controls[t].clone()))
}

/// Rollout where the control at step `t` may depend on the current state.
pub(crate) fn rollout_with<F>(objective: &dyn Objective, initial: &State, steps: usize, mut policy: F) -> Result<Rollout>
where
    F: FnMut(usize, &State) -> Result<ControlVector>,
{
    let model = objective.model();
    let mut states = Vec::with_capacity(steps + 1);
    let mut applied = Vec::with_capacity(steps);
    states.push(initial.clone());
    let mut cost = 0.0;
    for t in 0..steps {
        let u = clamp_to_limits(objective, &policy(t, &states[t])?);
        cost += objective.running_cost(&states[t], &u)?;
        match step(model, &states[t], &u) {
            Ok(next) => states.push(next),
            Err(Error::Diverged { .. }) => {
                applied.push(u);
                return Ok(Rollout { states, controls: applied, cost: f64::INFINITY, diverged: true });
            }
            Err(e) => return Err(e),
        }
        applied.push(u);
    }
    cost += objective.terminal_cost(&states[steps])?;
    if !cost.is_finite() {
        cost = f64::INFINITY;
    }
    Ok(Rollout { states, controls: applied, cost, diverged: false })
}
