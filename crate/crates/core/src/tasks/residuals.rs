use std::fmt;
use std::str::FromStr;

use crate::error::{contract, Error, Result};
use crate::sim::{com, dof, site_poses, ControlVector, SitePose, State};

use super::reward::{tolerance, Sigmoid};
use super::{Goal, TaskId, TaskSpec, R_MAX};

/// Registered residual functions that cost terms may name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidualId {
    HeadHeight,
    PelvisFeet,
    ComVelocity,
    Balance,
    Posture,
    Facing,
    Control,
    BoxTarget,
    LeftHandObject,
    RightHandObject,
    /// `R_MAX − r_hb`; with a smooth-abs norm this is the reward-to-cost transform.
    HbReward,
}

impl ResidualId {
    pub const ALL: [ResidualId; 11] = [
        ResidualId::HeadHeight,
        ResidualId::PelvisFeet,
        ResidualId::ComVelocity,
        ResidualId::Balance,
        ResidualId::Posture,
        ResidualId::Facing,
        ResidualId::Control,
        ResidualId::BoxTarget,
        ResidualId::LeftHandObject,
        ResidualId::RightHandObject,
        ResidualId::HbReward,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResidualId::HeadHeight => "head_height",
            ResidualId::PelvisFeet => "pelvis_feet",
            ResidualId::ComVelocity => "com_velocity",
            ResidualId::Balance => "balance",
            ResidualId::Posture => "posture",
            ResidualId::Facing => "facing",
            ResidualId::Control => "control",
            ResidualId::BoxTarget => "box_target",
            ResidualId::LeftHandObject => "left_hand_object",
            ResidualId::RightHandObject => "right_hand_object",
            ResidualId::HbReward => "hb_reward",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ResidualId::ComVelocity | ResidualId::LeftHandObject | ResidualId::RightHandObject => 2,
            ResidualId::Posture | ResidualId::Control => dof::ACTUATED.len(),
            _ => 1,
        }
    }

    pub fn needs_box(self) -> bool {
        matches!(self, ResidualId::BoxTarget | ResidualId::LeftHandObject | ResidualId::RightHandObject)
    }
}

impl fmt::Display for ResidualId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResidualId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| contract(format!("unknown residual id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandSide {
    Left,
    Right,
}

/// Kinematic quantities the residuals and rewards read, from one forward-kinematics pass.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub head: SitePose,
    pub pelvis: SitePose,
    pub left_foot: SitePose,
    pub right_foot: SitePose,
    pub left_hand: SitePose,
    pub right_hand: SitePose,
    pub com: SitePose,
    pub pitch: f64,
    pub joints: [f64; 4],
    pub box_x: Option<f64>,
}

impl Probe {
    pub fn new(task: &TaskSpec, state: &State) -> Result<Self> {
        let s = &task.sites;
        let poses = site_poses(&task.model, state, &[s.head, s.pelvis, s.left_foot, s.right_foot, s.left_hand, s.right_hand])?;
        let mut joints = [0.0; 4];
        for (j, &d) in dof::ACTUATED.iter().enumerate() {
            joints[j] = state.q[d];
        }
        Ok(Self {
            head: poses[0],
            pelvis: poses[1],
            left_foot: poses[2],
            right_foot: poses[3],
            left_hand: poses[4],
            right_hand: poses[5],
            com: com(&task.model, state)?,
            pitch: state.q[dof::PITCH],
            joints,
            box_x: task.model.boxed.as_ref().map(|b| state.q[b.dof]),
        })
    }

    pub fn head_height(&self, task: &TaskSpec) -> f64 {
        self.head.pos.y - task.target_head_height
    }

    pub fn pelvis_feet(&self, task: &TaskSpec) -> f64 {
        let feet = 0.5 * (self.left_foot.pos.y + self.right_foot.pos.y);
        self.pelvis.pos.y - feet - task.target_pelvis_gap
    }

    pub fn com_velocity(&self, target_speed: f64) -> [f64; 2] {
        [self.com.vel.x - target_speed, self.com.vel.y]
    }

    pub fn balance(&self) -> f64 {
        self.com.pos.x - 0.5 * (self.left_foot.pos.x + self.right_foot.pos.x)
    }

    pub fn posture(&self, task: &TaskSpec) -> [f64; 4] {
        let q = task.params.canonical_posture;
        [self.joints[0] - q[0], self.joints[1] - q[1], self.joints[2] - q[2], self.joints[3] - q[3]]
    }

    pub fn facing(&self) -> f64 {
        self.pitch
    }

    fn box_x(&self) -> Result<f64> {
        self.box_x.ok_or_else(|| contract("task has no box"))
    }

    pub fn box_target(&self, goal: &Goal) -> Result<f64> {
        let target = goal.box_target.ok_or_else(|| contract("goal has no box target"))?;
        Ok(self.box_x()? - target)
    }

    pub fn hand_object(&self, task: &TaskSpec, side: HandSide) -> Result<[f64; 2]> {
        let b = task.model.boxed.as_ref().ok_or_else(|| contract("task has no box"))?;
        let c = self.box_x()?;
        let hand = match side {
            HandSide::Left => self.left_hand.pos,
            HandSide::Right => self.right_hand.pos,
        };
        let nearest_x = hand.x.clamp(c - b.half_width, c + b.half_width);
        let nearest_z = hand.y.clamp(0.0, b.height);
        Ok([hand.x - nearest_x, hand.y - nearest_z])
    }

    pub fn hb_reward(&self, task: &TaskSpec, goal: &Goal, control: &ControlVector) -> f64 {
        let p = &task.params;
        let stand = || {
            let h_min = p.head_min_fraction * task.target_head_height;
            let upright = tolerance(self.head.pos.y, h_min, f64::INFINITY, p.head_margin, Sigmoid::Gaussian, 0.1);
            let limits = task.model.actuators.iter().map(|a| a.limit);
            let n = control.len().max(1) as f64;
            let small: f64 = control
                .iter()
                .zip(limits)
                .map(|(u, lim)| tolerance(u / lim, 0.0, 0.0, 1.0, Sigmoid::Quadratic, 0.0))
                .sum::<f64>()
                / n;
            upright * (4.0 + small) / 5.0
        };
        let r = match task.id {
            TaskId::Stand => stand(),
            TaskId::Walk => {
                let v_t = goal.walk_speed.unwrap_or(p.walk_target_speed);
                let moving = if v_t > 0.0 {
                    tolerance(self.com.vel.x, v_t, f64::INFINITY, v_t, Sigmoid::Gaussian, 0.1)
                } else {
                    1.0
                };
                stand() * moving
            }
            TaskId::Push => {
                let (Some(target), Some(bx)) = (goal.box_target, self.box_x) else {
                    return 0.0;
                };
                let d = bx - target;
                let closeness = (-(d * d) / (p.push_sigma * p.push_sigma)).exp();
                let reach = [HandSide::Left, HandSide::Right]
                    .into_iter()
                    .filter_map(|s| self.hand_object(task, s).ok())
                    .map(|r| r[0].hypot(r[1]))
                    .fold(f64::INFINITY, f64::min);
                let proximity = tolerance(reach, 0.0, 0.0, p.proximity_margin, Sigmoid::Gaussian, 0.1);
                closeness * (1.0 + proximity) / 2.0
            }
        };
        r.clamp(0.0, R_MAX)
    }

    pub(crate) fn fill(&self, id: ResidualId, task: &TaskSpec, goal: &Goal, control: &ControlVector, out: &mut [f64]) -> Result<()> {
        match id {
            ResidualId::HeadHeight => out[0] = self.head_height(task),
            ResidualId::PelvisFeet => out[0] = self.pelvis_feet(task),
            ResidualId::ComVelocity => out.copy_from_slice(&self.com_velocity(task.target_speed(goal))),
            ResidualId::Balance => out[0] = self.balance(),
            ResidualId::Posture => out.copy_from_slice(&self.posture(task)),
            ResidualId::Facing => out[0] = self.facing(),
            ResidualId::Control => {
                if control.len() != out.len() {
                    return Err(contract("control length does not match the control residual"));
                }
                out.copy_from_slice(control.as_slice());
            }
            ResidualId::BoxTarget => out[0] = self.box_target(goal)?,
            ResidualId::LeftHandObject => out.copy_from_slice(&self.hand_object(task, HandSide::Left)?),
            ResidualId::RightHandObject => out.copy_from_slice(&self.hand_object(task, HandSide::Right)?),
            ResidualId::HbReward => out[0] = R_MAX - self.hb_reward(task, goal, control),
        }
        Ok(())
    }
}

/// Head height above the calibrated target; negative when below.
pub fn residual_head_height(state: &State, task: &TaskSpec) -> Result<f64> {
    Ok(Probe::new(task, state)?.head_height(task))
}

/// Pelvis height above the mean foot height, minus the canonical gap.
pub fn residual_pelvis_feet(state: &State, task: &TaskSpec) -> Result<f64> {
    Ok(Probe::new(task, state)?.pelvis_feet(task))
}

/// CoM velocity minus `(target speed, 0)`.
pub fn residual_com_velocity(state: &State, task: &TaskSpec) -> Result<[f64; 2]> {
    Ok(Probe::new(task, state)?.com_velocity(task.target_speed(&task.initial_goal())))
}

/// Horizontal offset of the CoM from the midpoint between the feet.
pub fn residual_balance(state: &State, task: &TaskSpec) -> Result<f64> {
    Ok(Probe::new(task, state)?.balance())
}

pub fn residual_posture(state: &State, task: &TaskSpec) -> Result<[f64; 4]> {
    Ok(Probe::new(task, state)?.posture(task))
}

/// Torso pitch away from upright; the planar stand-in for heading.
pub fn residual_facing(state: &State) -> f64 {
    state.q[dof::PITCH]
}

pub fn residual_control(control: &ControlVector) -> ControlVector {
    control.clone()
}

pub fn residual_box_target(state: &State, task: &TaskSpec, goal: &Goal) -> Result<f64> {
    if task.model.boxed.is_none() {
        return Err(contract("task has no box"));
    }
    Probe::new(task, state)?.box_target(goal)
}

/// Hand position minus the nearest point of the box.
pub fn residual_hand_object(state: &State, task: &TaskSpec, side: HandSide) -> Result<[f64; 2]> {
    if task.model.boxed.is_none() {
        return Err(contract("task has no box"));
    }
    Probe::new(task, state)?.hand_object(task, side)
}
