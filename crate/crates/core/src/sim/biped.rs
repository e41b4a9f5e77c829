//! The planar five-link biped: torso (with head and hand sites) over two thigh+shank legs
//! with point feet, on a floating x/z/pitch base, optionally next to a pushable box.

use serde::{Deserialize, Serialize};

use super::model::{Actuator, BoxSpec, ContactParams, Joint, Link, ModelSpec, Site};

pub mod dof {
    pub const ROOT_X: usize = 0;
    pub const ROOT_Z: usize = 1;
    pub const PITCH: usize = 2;
    pub const LEFT_HIP: usize = 3;
    pub const LEFT_KNEE: usize = 4;
    pub const RIGHT_HIP: usize = 5;
    pub const RIGHT_KNEE: usize = 6;
    pub const BOX: usize = 7;
    /// Actuated joints, in control-vector order.
    pub const ACTUATED: [usize; 4] = [LEFT_HIP, LEFT_KNEE, RIGHT_HIP, RIGHT_KNEE];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxParams {
    pub mass: f64,
    pub half_width: f64,
    pub height: f64,
    pub friction: f64,
    pub pusher_stiffness: f64,
    pub pusher_damping: f64,
}

impl Default for BoxParams {
    fn default() -> Self {
        Self {
            mass: 4.0,
            half_width: 0.1,
            height: 1.3,
            friction: 0.8,
            pusher_stiffness: 4000.0,
            pusher_damping: 80.0,
        }
    }
}

/// Physical parameters of the biped. Defaults give a ~30 kg robot with a ~1.4 m head height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BipedParams {
    pub torso_mass: f64,
    pub torso_length: f64,
    pub thigh_mass: f64,
    pub thigh_length: f64,
    pub shank_mass: f64,
    pub shank_length: f64,
    /// Head site height above the hip along the torso axis.
    pub head_offset: f64,
    pub hand_forward: f64,
    pub left_hand_height: f64,
    pub right_hand_height: f64,
    pub actuator_limit: f64,
    pub joint_damping: f64,
    pub armature: f64,
    pub gravity: f64,
    pub physics_dt: f64,
    pub control_dt: f64,
    pub contact: ContactParams,
    #[serde(rename = "box")]
    pub boxed: BoxParams,
}

impl Default for BipedParams {
    fn default() -> Self {
        Self {
            torso_mass: 16.0,
            torso_length: 0.5,
            thigh_mass: 4.0,
            thigh_length: 0.45,
            shank_mass: 3.0,
            shank_length: 0.45,
            head_offset: 0.5,
            hand_forward: 0.32,
            left_hand_height: 0.28,
            right_hand_height: 0.22,
            actuator_limit: 150.0,
            joint_damping: 1.0,
            armature: 0.02,
            gravity: 9.81,
            physics_dt: 0.005,
            control_dt: 0.02,
            contact: ContactParams::default(),
            boxed: BoxParams::default(),
        }
    }
}

fn rod(name: &str, parent: Option<usize>, joint: Joint, anchor: [f64; 2], mass: f64, length: f64, up: bool) -> Link {
    let sign = if up { 1.0 } else { -1.0 };
    Link {
        name: name.into(),
        parent,
        joint,
        anchor,
        length,
        mass,
        inertia: mass * length * length / 12.0,
        com: [0.0, sign * 0.5 * length],
    }
}

impl ModelSpec {
    pub fn biped(p: &BipedParams, with_box: bool) -> Self {
        use dof::*;
        let links = vec![
            rod("torso", None, Joint::Planar { dofs: [ROOT_X, ROOT_Z, PITCH] }, [0.0, 0.0], p.torso_mass, p.torso_length, true),
            rod("left_thigh", Some(0), Joint::Revolute { dof: LEFT_HIP }, [0.0, 0.0], p.thigh_mass, p.thigh_length, false),
            rod("left_shank", Some(1), Joint::Revolute { dof: LEFT_KNEE }, [0.0, -p.thigh_length], p.shank_mass, p.shank_length, false),
            rod("right_thigh", Some(0), Joint::Revolute { dof: RIGHT_HIP }, [0.0, 0.0], p.thigh_mass, p.thigh_length, false),
            rod("right_shank", Some(3), Joint::Revolute { dof: RIGHT_KNEE }, [0.0, -p.thigh_length], p.shank_mass, p.shank_length, false),
        ];
        let site = |name: &str, link: usize, offset: [f64; 2]| Site { name: name.into(), link, offset };
        let sites = vec![
            site("head", 0, [0.0, p.head_offset]),
            site("pelvis", 0, [0.0, 0.0]),
            site("left_foot", 2, [0.0, -p.shank_length]),
            site("right_foot", 4, [0.0, -p.shank_length]),
            site("left_hand", 0, [p.hand_forward, p.left_hand_height]),
            site("right_hand", 0, [p.hand_forward, p.right_hand_height]),
            site("left_knee", 1, [0.0, -p.thigh_length]),
            site("right_knee", 3, [0.0, -p.thigh_length]),
        ];
        let actuators = [("left_hip", LEFT_HIP), ("left_knee", LEFT_KNEE), ("right_hip", RIGHT_HIP), ("right_knee", RIGHT_KNEE)]
            .into_iter()
            .map(|(name, dof)| Actuator { name: name.into(), dof, limit: p.actuator_limit })
            .collect();
        let boxed = with_box.then(|| BoxSpec {
            dof: BOX,
            mass: p.boxed.mass,
            half_width: p.boxed.half_width,
            height: p.boxed.height,
            friction: p.boxed.friction,
            pusher_stiffness: p.boxed.pusher_stiffness,
            pusher_damping: p.boxed.pusher_damping,
            // every site, so no part of the robot can pass through the box
            pushers: (0..sites.len()).collect(),
        });
        Self {
            ndof: if with_box { 8 } else { 7 },
            links,
            sites,
            actuators,
            // feet, knees, pelvis, head, hands
            contact_sites: vec![2, 3, 6, 7, 1, 0, 4, 5],
            contact: p.contact,
            gravity: p.gravity,
            joint_damping: p.joint_damping,
            armature: p.armature,
            boxed,
            physics_dt: p.physics_dt,
            control_dt: p.control_dt,
        }
    }
}
