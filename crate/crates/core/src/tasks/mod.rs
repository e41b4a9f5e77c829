//! Stand, walk and push tasks: shaped residuals, benchmark-style rewards, and episode rules.

mod residuals;
pub mod reward;

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{CostSpec, CostTerm, Norm, ResidualVector};
use crate::error::{contract, Result};
use crate::planners::Objective;
use crate::sim::{dof, site_pose, BipedParams, ControlVector, ModelSpec, SiteId, State};

pub use residuals::{
    residual_balance, residual_box_target, residual_com_velocity, residual_control, residual_facing,
    residual_hand_object, residual_head_height, residual_pelvis_feet, residual_posture, HandSide, Probe, ResidualId,
};

/// The reward an episode is scored with never exceeds this.
pub const R_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    Stand,
    Walk,
    Push,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostVariant {
    /// Shaped stability terms (plus dense push terms).
    Ours,
    /// The benchmark reward alone, through the reward-to-cost transform.
    Hb,
}

macro_rules! str_enum {
    ($ty:ty { $($var:ident => $s:literal),* $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$var => $s),* }
            }
        }
        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl ::std::str::FromStr for $ty {
            type Err = $crate::error::Error;
            fn from_str(s: &str) -> $crate::error::Result<Self> {
                match s {
                    $($s => Ok(Self::$var),)*
                    other => Err($crate::error::Error::Contract(format!("unknown {} '{other}'", stringify!($ty)))),
                }
            }
        }
    };
}
pub(crate) use str_enum;

str_enum!(TaskId { Stand => "stand", Walk => "walk", Push => "push" });
str_enum!(CostVariant { Ours => "ours", Hb => "hb" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    None,
    BoxAtTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Respawn {
    None,
    OnSuccess,
}

/// Tunable task constants. Geometry-dependent defaults assume the default biped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskParams {
    pub episode_length_s: f64,
    /// Canonical joint angles (left hip, left knee, right hip, right knee), rad.
    pub canonical_posture: [f64; 4],
    pub joint_noise: f64,
    pub walk_target_speed: f64,
    /// Stand reward full credit above this fraction of the canonical head height.
    pub head_min_fraction: f64,
    pub head_margin: f64,
    pub push_sigma: f64,
    pub proximity_margin: f64,
    /// Smooth-abs parameter of the reward-to-cost transform.
    pub reward_smoothing: f64,
    /// Smooth-abs parameter used by default for shaped terms.
    pub shaping_smoothing: f64,
    pub termination: Termination,
    pub respawn: Respawn,
    pub success_threshold: f64,
    pub workspace: [f64; 2],
    pub box_start: f64,
    pub box_target: f64,
}

impl TaskParams {
    pub fn defaults_for(id: TaskId) -> Self {
        let mut p = Self::default();
        match id {
            TaskId::Stand => {}
            TaskId::Walk => p.walk_target_speed = 1.0,
            TaskId::Push => p.respawn = Respawn::OnSuccess,
        }
        p
    }
}

impl Default for TaskParams {
    fn default() -> Self {
        Self {
            episode_length_s: 8.0,
            canonical_posture: [0.2, 0.0, -0.2, 0.0],
            joint_noise: 0.02,
            walk_target_speed: 0.0,
            head_min_fraction: 0.9,
            head_margin: 0.4,
            push_sigma: 0.3,
            proximity_margin: 0.5,
            reward_smoothing: 0.01,
            shaping_smoothing: 0.1,
            termination: Termination::None,
            respawn: Respawn::None,
            success_threshold: 0.05,
            workspace: [0.45, 1.25],
            box_start: 0.45,
            box_target: 0.7,
        }
    }
}

/// What the robot is currently asked to achieve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub box_target: Option<f64>,
    pub walk_speed: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Sites {
    pub head: SiteId,
    pub pelvis: SiteId,
    pub left_foot: SiteId,
    pub right_foot: SiteId,
    pub left_hand: SiteId,
    pub right_hand: SiteId,
}

#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub id: TaskId,
    pub variant: CostVariant,
    pub biped: BipedParams,
    pub model: ModelSpec,
    pub params: TaskParams,
    pub cost: CostSpec,
    /// Root height that puts the feet exactly on the ground in the canonical posture.
    pub canonical_root_height: f64,
    pub target_head_height: f64,
    pub target_pelvis_gap: f64,
    pub(crate) sites: Sites,
    residual_ids: Vec<ResidualId>,
}

impl TaskSpec {
    pub fn new(id: TaskId, variant: CostVariant, biped: BipedParams, params: TaskParams, cost: Option<CostSpec>) -> Result<Self> {
        let model = ModelSpec::biped(&biped, id == TaskId::Push);
        model.validate()?;
        let sites = Sites {
            head: model.site_id("head")?,
            pelvis: model.site_id("pelvis")?,
            left_foot: model.site_id("left_foot")?,
            right_foot: model.site_id("right_foot")?,
            left_hand: model.site_id("left_hand")?,
            right_hand: model.site_id("right_hand")?,
        };
        validate_params(&params, &model, id)?;

        let mut probe = State::zeros(model.ndof);
        for (j, &d) in dof::ACTUATED.iter().enumerate() {
            probe.q[d] = params.canonical_posture[j];
        }
        let lf = site_pose(&model, &probe, sites.left_foot)?.pos.y;
        let rf = site_pose(&model, &probe, sites.right_foot)?.pos.y;
        let canonical_root_height = -lf.min(rf);
        probe.q[dof::ROOT_Z] = canonical_root_height;
        let head = site_pose(&model, &probe, sites.head)?.pos.y;
        let pelvis = site_pose(&model, &probe, sites.pelvis)?.pos.y;
        let feet = 0.5 * (lf + rf) + canonical_root_height;

        let cost = match cost {
            Some(c) => c,
            None => default_cost(id, variant, &params)?,
        };
        cost.validate()?;
        let residual_ids = cost
            .terms
            .iter()
            .map(|t| ResidualId::from_str(&t.residual))
            .collect::<Result<Vec<_>>>()?;
        if id != TaskId::Push && residual_ids.iter().any(|r| r.needs_box()) {
            return Err(contract(format!("cost '{}' uses box residuals but task '{id}' has no box", cost.name)));
        }
        Ok(Self {
            id,
            variant,
            biped,
            model,
            params,
            cost,
            canonical_root_height,
            target_head_height: head,
            target_pelvis_gap: pelvis - feet,
            sites,
            residual_ids,
        })
    }

    pub fn with_defaults(id: TaskId, variant: CostVariant) -> Result<Self> {
        Self::new(id, variant, BipedParams::default(), TaskParams::defaults_for(id), None)
    }

    pub fn residual_ids(&self) -> &[ResidualId] {
        &self.residual_ids
    }

    pub fn initial_goal(&self) -> Goal {
        Goal {
            box_target: (self.id == TaskId::Push).then_some(self.params.box_target),
            walk_speed: (self.id == TaskId::Walk).then_some(self.params.walk_target_speed),
        }
    }

    /// Horizontal CoM speed the task asks for (zero when standing or pushing).
    pub fn target_speed(&self, goal: &Goal) -> f64 {
        goal.walk_speed.unwrap_or(0.0)
    }

    pub fn canonical_state(&self) -> State {
        let mut s = State::zeros(self.model.ndof);
        s.q[dof::ROOT_Z] = self.canonical_root_height;
        for (j, &d) in dof::ACTUATED.iter().enumerate() {
            s.q[d] = self.params.canonical_posture[j];
        }
        if self.model.boxed.is_some() {
            s.q[dof::BOX] = self.params.box_start;
        }
        s
    }

    /// Whole-episode step count at the model's control rate.
    pub fn episode_steps(&self, length_s: f64) -> Result<usize> {
        steps_for(length_s, self.model.control_dt)
    }

    pub fn objective(&self, goal: Goal) -> TaskObjective<'_> {
        TaskObjective { task: self, goal }
    }
}

pub(crate) fn steps_for(length_s: f64, dt: f64) -> Result<usize> {
    let ratio = length_s / dt;
    if !(length_s > 0.0) || (ratio - ratio.round()).abs() > 1e-6 {
        return Err(contract(format!("length {length_s} s is not a positive multiple of the control step {dt} s")));
    }
    Ok(ratio.round() as usize)
}

fn validate_params(p: &TaskParams, model: &ModelSpec, id: TaskId) -> Result<()> {
    steps_for(p.episode_length_s, model.control_dt)?;
    if !(p.joint_noise >= 0.0) {
        return Err(contract("joint noise must be non-negative"));
    }
    if !(p.head_margin > 0.0 && p.push_sigma > 0.0 && p.reward_smoothing > 0.0 && p.shaping_smoothing > 0.0) {
        return Err(contract("reward margins and smoothing parameters must be positive"));
    }
    if id == TaskId::Push {
        let [lo, hi] = p.workspace;
        if !(p.success_threshold > 0.0) {
            return Err(contract("success threshold must be positive"));
        }
        if !(hi - lo > 4.0 * p.success_threshold) {
            return Err(contract("respawn workspace must be wider than four success thresholds"));
        }
        if !(lo..=hi).contains(&p.box_target) {
            return Err(contract("initial box target lies outside the workspace"));
        }
    }
    Ok(())
}

fn default_cost(id: TaskId, variant: CostVariant, p: &TaskParams) -> Result<CostSpec> {
    let s = Norm::smooth_abs(p.shaping_smoothing);
    let terms = match variant {
        CostVariant::Hb => vec![CostTerm::new("hb_reward", Norm::smooth_abs(p.reward_smoothing), 10.0)],
        CostVariant::Ours => {
            let mut t = vec![
                CostTerm::new("head_height", s, 100.0),
                CostTerm::new("pelvis_feet", s, 10.0),
                CostTerm::new("com_velocity", s, 10.0),
                CostTerm::new("balance", s, 20.0),
                CostTerm::new("posture", s, 1.0),
                CostTerm::new("facing", s, 10.0),
                CostTerm::new("control", Norm::quadratic(), 3e-4),
            ];
            if id == TaskId::Push {
                t.push(CostTerm::new("box_target", s, 20.0));
                t.push(CostTerm::new("left_hand_object", s, 5.0));
                t.push(CostTerm::new("right_hand_object", s, 5.0));
            }
            t
        }
    };
    CostSpec::new(&format!("{}-{}", variant, id), terms)
}

/// Benchmark-style reward in `[0, 1]`.
///
/// * stand: head-height tolerance times a small-control factor in `[0.8, 1]`
/// * walk: the stand reward times a forward-speed tolerance
/// * push: Gaussian box-to-target closeness times a hand-proximity factor in `[0.5, 1]`
pub fn hb_reward(state: &State, control: &ControlVector, task: &TaskSpec, goal: &Goal) -> Result<f64> {
    let probe = Probe::new(task, state)?;
    Ok(probe.hb_reward(task, goal, control))
}

/// Draws a fresh push target once the box reaches the current one, or flags termination.
pub fn check_termination_and_respawn<R: Rng + ?Sized>(state: &State, task: &TaskSpec, goal: &Goal, rng: &mut R) -> (bool, Goal) {
    let (Some(target), Some(b)) = (goal.box_target, task.model.boxed.as_ref()) else {
        return (false, *goal);
    };
    let box_x = state.q[b.dof];
    let thr = task.params.success_threshold;
    if (box_x - target).abs() >= thr {
        return (false, *goal);
    }
    if task.params.termination == Termination::BoxAtTarget {
        return (true, *goal);
    }
    if task.params.respawn == Respawn::None {
        return (false, *goal);
    }
    let [lo, hi] = task.params.workspace;
    let mut fresh = None;
    for _ in 0..10_000 {
        let candidate = rng.random_range(lo..=hi);
        if (candidate - box_x).abs() >= 2.0 * thr {
            fresh = Some(candidate);
            break;
        }
    }
    // The workspace is wider than four thresholds, so one bound always qualifies.
    let fresh = fresh.unwrap_or(if box_x - lo > hi - box_x { lo } else { hi });
    (false, Goal { box_target: Some(fresh), ..*goal })
}

/// Canonical posture with uniform joint noise; zero velocity; box at its start position.
pub fn initial_state<R: Rng + ?Sized>(task: &TaskSpec, rng: &mut R) -> State {
    let mut s = task.canonical_state();
    let a = task.params.joint_noise;
    if a > 0.0 {
        for &d in &dof::ACTUATED {
            s.q[d] += rng.random_range(-a..=a);
        }
    }
    s
}

/// A task plus its current goal, seen through the planner interface.
#[derive(Debug, Clone, Copy)]
pub struct TaskObjective<'a> {
    pub task: &'a TaskSpec,
    pub goal: Goal,
}

impl Objective for TaskObjective<'_> {
    fn model(&self) -> &ModelSpec {
        &self.task.model
    }

    fn cost_spec(&self) -> &CostSpec {
        &self.task.cost
    }

    fn residual_dims(&self) -> Vec<usize> {
        self.task.residual_ids.iter().map(|r| r.dim()).collect()
    }

    fn residuals(&self, state: &State, control: &ControlVector, out: &mut ResidualVector) -> Result<()> {
        let probe = Probe::new(self.task, state)?;
        for (i, id) in self.task.residual_ids.iter().enumerate() {
            probe.fill(*id, self.task, &self.goal, control, out.term_mut(i))?;
        }
        Ok(())
    }
}
