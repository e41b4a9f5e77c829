use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planners::{Agent, PlannerConfig, PlannerKind};
use crate::sim::{dof, step, ControlVector, State};
use crate::tasks::{check_termination_and_respawn, hb_reward, initial_state, CostVariant, Goal, TaskId, TaskSpec};

/// Seed offset separating the agent's sampling stream from the episode's own stream.
const AGENT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// State after applying `control`.
    pub state: State,
    pub control: ControlVector,
    pub reward: f64,
    pub plan_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RespawnEvent {
    pub step: usize,
    pub goal: Goal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub task: TaskId,
    pub variant: CostVariant,
    pub planner: PlannerKind,
    pub iterations: usize,
    pub horizon_s: f64,
    pub seed: u64,
    pub length_s: f64,
    pub control_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub meta: EpisodeMeta,
    pub steps: Vec<StepRecord>,
    /// Step at which the termination rule fired.
    pub termination_step: Option<usize>,
    pub respawns: Vec<RespawnEvent>,
    /// Step whose integration diverged; the record stops just before it.
    pub diverged_at: Option<usize>,
    pub planner_calls: usize,
    pub planner_iterations: usize,
    pub degraded_calls: Vec<usize>,
}

impl EpisodeRecord {
    /// Steps the episode would have taken without termination or divergence.
    pub fn planned_steps(&self) -> usize {
        (self.meta.length_s / self.meta.control_dt).round() as usize
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    /// Per-step rewards over the planned length. A diverged episode scores 0 after divergence;
    /// a terminated episode is simply shorter.
    pub fn reward_series(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.rewards().collect();
        if self.diverged_at.is_some() {
            r.resize(self.planned_steps(), 0.0);
        }
        r
    }

    pub fn plan_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.plan_time_s)
    }

    /// The record cut to its first `steps` steps, as if the episode had been that long.
    pub fn prefix(&self, steps: usize) -> Self {
        let keep = steps.min(self.steps.len());
        let mut out = self.clone();
        out.meta.length_s = steps as f64 * self.meta.control_dt;
        out.steps.truncate(keep);
        out.termination_step = self.termination_step.filter(|&s| s < steps);
        out.respawns.retain(|e| e.step < steps);
        out.diverged_at = self.diverged_at.filter(|&s| s < steps);
        out.planner_calls = keep;
        out.planner_iterations = self.meta.iterations * keep;
        out.degraded_calls.retain(|&c| c < keep);
        out
    }
}

/// Runs one episode: plan, step, reward, termination/respawn, until the length or termination.
///
/// `seed` drives the initial-state noise and the respawn draws; the agent carries its own stream.
pub fn run_episode(task: &TaskSpec, agent: &mut Agent, length_s: f64, seed: u64) -> Result<EpisodeRecord> {
    let n = task.episode_steps(length_s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = initial_state(task, &mut rng);
    let mut goal = task.initial_goal();
    let calls0 = agent.stats.planner_calls;
    let iters0 = agent.stats.planner_iterations;
    let degraded0 = agent.stats.degraded_calls.len();
    let mut rec = EpisodeRecord {
        meta: EpisodeMeta {
            task: task.id,
            variant: task.variant,
            planner: agent.config.kind,
            iterations: agent.config.iterations,
            horizon_s: agent.config.horizon_s,
            seed,
            length_s,
            control_dt: task.model.control_dt,
        },
        steps: Vec::with_capacity(n),
        termination_step: None,
        respawns: Vec::new(),
        diverged_at: None,
        planner_calls: 0,
        planner_iterations: 0,
        degraded_calls: Vec::new(),
    };
    for k in 0..n {
        let objective = task.objective(goal);
        let started = Instant::now();
        let control = agent.step(&objective, &state)?;
        let plan_time_s = started.elapsed().as_secs_f64();
        let next = match step(&task.model, &state, &control) {
            Ok(s) => s,
            Err(Error::Diverged { .. }) => {
                rec.diverged_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        };
        let reward = hb_reward(&next, &control, task, &goal)?;
        let (terminated, fresh) = check_termination_and_respawn(&next, task, &goal, &mut rng);
        if fresh != goal {
            rec.respawns.push(RespawnEvent { step: k, goal: fresh });
            goal = fresh;
        }
        state = next.clone();
        rec.steps.push(StepRecord { state: next, control, reward, plan_time_s });
        if terminated {
            rec.termination_step = Some(k);
            break;
        }
    }
    rec.planner_calls = agent.stats.planner_calls - calls0;
    rec.planner_iterations = agent.stats.planner_iterations - iters0;
    rec.degraded_calls = agent.stats.degraded_calls[degraded0..].iter().map(|c| c - calls0).collect();
    Ok(rec)
}

/// Fresh agent for `seed`, then [`run_episode`].
pub fn run_seed(task: &TaskSpec, config: &PlannerConfig, length_s: f64, seed: u64) -> Result<EpisodeRecord> {
    let mut agent = Agent::new(config.clone(), seed ^ AGENT_STREAM)?;
    run_episode(task, &mut agent, length_s, seed)
}

/// Sum of per-step rewards.
pub fn score(record: &EpisodeRecord) -> f64 {
    record.rewards().sum()
}

/// Score divided by the planned step count, so different lengths compare directly.
pub fn mean_step_reward(record: &EpisodeRecord) -> f64 {
    let n = record.planned_steps();
    if n == 0 {
        0.0
    } else {
        score(record) / n as f64
    }
}

/// Mean over steps of the mean squared actuated-joint velocity, rad²/s².
pub fn smoothness(record: &EpisodeRecord) -> f64 {
    if record.steps.is_empty() {
        return 0.0;
    }
    let total: f64 = record
        .steps
        .iter()
        .map(|s| dof::ACTUATED.iter().map(|&d| s.state.v[d].powi(2)).sum::<f64>() / dof::ACTUATED.len() as f64)
        .sum();
    total / record.steps.len() as f64
}
