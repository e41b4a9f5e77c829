use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Upper bound on generalized coordinates; dynamics run on fixed-size buffers of this width.
pub const MAX_DOF: usize = 8;

/// How a link attaches to its parent frame (or the world).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Joint {
    Revolute { dof: usize },
    Prismatic { dof: usize, axis: [f64; 2] },
    /// Floating planar base: translation x, translation z, pitch.
    Planar { dofs: [usize; 3] },
}

impl Joint {
    fn dofs(&self) -> Vec<usize> {
        match self {
            Joint::Revolute { dof } | Joint::Prismatic { dof, .. } => vec![*dof],
            Joint::Planar { dofs } => dofs.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub parent: Option<usize>,
    pub joint: Joint,
    /// Joint location in the parent frame (world frame for root links).
    pub anchor: [f64; 2],
    pub length: f64,
    pub mass: f64,
    pub inertia: f64,
    pub com: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    pub link: usize,
    pub offset: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteId(pub(crate) usize);

impl SiteId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actuator {
    pub name: String,
    pub dof: usize,
    /// Symmetric bound: the applied generalized force lies in `[-limit, limit]`.
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactParams {
    pub stiffness: f64,
    pub damping: f64,
    pub friction: f64,
    pub smoothing_velocity: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self { stiffness: 2.0e4, damping: 400.0, friction: 1.0, smoothing_velocity: 0.02 }
    }
}

/// A block sliding along ground x, pushed by penalty contact with designated sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub dof: usize,
    pub mass: f64,
    pub half_width: f64,
    pub height: f64,
    pub friction: f64,
    pub pusher_stiffness: f64,
    pub pusher_damping: f64,
    pub pushers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub ndof: usize,
    /// Topologically ordered: every parent index precedes its children.
    pub links: Vec<Link>,
    pub sites: Vec<Site>,
    pub actuators: Vec<Actuator>,
    /// Sites that collide with the ground plane z = 0.
    pub contact_sites: Vec<usize>,
    pub contact: ContactParams,
    pub gravity: f64,
    pub joint_damping: f64,
    /// Reflected rotor inertia added to each actuated dof.
    pub armature: f64,
    pub boxed: Option<BoxSpec>,
    pub physics_dt: f64,
    pub control_dt: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ndof == 0 || self.ndof > MAX_DOF {
            return Err(contract(format!("ndof {} outside 1..={MAX_DOF}", self.ndof)));
        }
        let mut claimed = vec![false; self.ndof];
        for (i, link) in self.links.iter().enumerate() {
            if let Some(p) = link.parent {
                if p >= i {
                    return Err(contract(format!("link {} precedes its parent", link.name)));
                }
            }
            if !(link.mass > 0.0 && link.inertia > 0.0 && link.length > 0.0) {
                return Err(contract(format!("link {} needs positive mass, inertia and length", link.name)));
            }
            for d in link.joint.dofs() {
                if d >= self.ndof || claimed[d] {
                    return Err(contract(format!("link {} uses invalid or duplicate dof {d}", link.name)));
                }
                claimed[d] = true;
            }
        }
        if let Some(b) = &self.boxed {
            if b.dof >= self.ndof || claimed[b.dof] {
                return Err(contract("box dof invalid or shared"));
            }
            claimed[b.dof] = true;
            if !(b.mass > 0.0 && b.half_width > 0.0 && b.height > 0.0 && b.pusher_stiffness > 0.0) {
                return Err(contract("box parameters must be positive"));
            }
            if b.pushers.iter().any(|&s| s >= self.sites.len()) {
                return Err(contract("box pusher names an unknown site"));
            }
        }
        if claimed.iter().any(|c| !c) {
            return Err(contract("every dof must belong to exactly one joint"));
        }
        for s in &self.sites {
            if s.link >= self.links.len() {
                return Err(contract(format!("site {} on unknown link", s.name)));
            }
        }
        if self.contact_sites.iter().any(|&s| s >= self.sites.len()) {
            return Err(contract("contact site out of range"));
        }
        if !self.contact_sites.is_empty() && !(self.contact.stiffness > 0.0 && self.contact.smoothing_velocity > 0.0) {
            return Err(contract("contact stiffness and smoothing velocity must be positive"));
        }
        for a in &self.actuators {
            if a.dof >= self.ndof || !(a.limit > 0.0) {
                return Err(contract(format!("actuator {} invalid", a.name)));
            }
        }
        if !(self.physics_dt > 0.0 && self.control_dt > 0.0) {
            return Err(contract("timesteps must be positive"));
        }
        let ratio = self.control_dt / self.physics_dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(contract("control timestep must be an integer multiple of the physics timestep"));
        }
        Ok(())
    }

    pub fn substeps(&self) -> usize {
        (self.control_dt / self.physics_dt).round() as usize
    }

    pub fn nu(&self) -> usize {
        self.actuators.len()
    }

    /// Length of the stacked `[q; v]` vector.
    pub fn nx(&self) -> usize {
        2 * self.ndof
    }

    pub fn site_id(&self, name: &str) -> Result<SiteId> {
        self.sites
            .iter()
            .position(|s| s.name == name)
            .map(SiteId)
            .ok_or_else(|| contract(format!("unknown site '{name}'")))
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    pub fn actuator_limits(&self) -> Vec<f64> {
        self.actuators.iter().map(|a| a.limit).collect()
    }

    /// Single prismatic dof along x driven directly by the control: a pure double integrator.
    pub fn double_integrator(mass: f64, control_dt: f64, substeps: usize) -> Self {
        Self {
            ndof: 1,
            links: vec![Link {
                name: "slider".into(),
                parent: None,
                joint: Joint::Prismatic { dof: 0, axis: [1.0, 0.0] },
                anchor: [0.0, 0.0],
                length: 1.0,
                mass,
                inertia: 1.0,
                com: [0.0, 0.0],
            }],
            sites: vec![Site { name: "tip".into(), link: 0, offset: [0.0, 0.0] }],
            actuators: vec![Actuator { name: "force".into(), dof: 0, limit: 1.0e6 }],
            contact_sites: vec![],
            contact: ContactParams::default(),
            gravity: 0.0,
            joint_damping: 0.0,
            armature: 0.0,
            boxed: None,
            physics_dt: control_dt / substeps as f64,
            control_dt,
        }
    }

    /// Point-mass pendulum on a massless-ish rod hinged at the origin; angle 0 hangs straight down.
    pub fn pendulum(mass: f64, length: f64, torque_limit: f64) -> Self {
        Self {
            ndof: 1,
            links: vec![Link {
                name: "rod".into(),
                parent: None,
                joint: Joint::Revolute { dof: 0 },
                anchor: [0.0, 0.0],
                length,
                mass,
                inertia: 1e-6,
                com: [0.0, -length],
            }],
            sites: vec![Site { name: "tip".into(), link: 0, offset: [0.0, -length] }],
            actuators: vec![Actuator { name: "torque".into(), dof: 0, limit: torque_limit }],
            contact_sites: vec![],
            contact: ContactParams::default(),
            gravity: 9.81,
            joint_damping: 0.0,
            armature: 0.0,
            boxed: None,
            physics_dt: 0.005,
            control_dt: 0.02,
        }
    }
}
