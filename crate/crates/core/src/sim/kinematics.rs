use nalgebra::{SVector, Vector2};

use super::model::{Joint, ModelSpec, SiteId, MAX_DOF};
use super::State;
use crate::error::{contract, Result};

pub(crate) type DofVec = SVector<f64, MAX_DOF>;

/// World position and linear velocity of a point of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SitePose {
    pub pos: Vector2<f64>,
    pub vel: Vector2<f64>,
}

/// Rotation by a pitch angle; positive pitch tips the local +z axis toward world +x.
#[inline]
pub(crate) fn rotate(angle: f64, r: [f64; 2]) -> Vector2<f64> {
    let (s, c) = angle.sin_cos();
    Vector2::new(r[0] * c + r[1] * s, -r[0] * s + r[1] * c)
}

/// Derivative of `rotate(angle, r)` with respect to the angle, expressed on the rotated vector.
#[inline]
pub(crate) fn perp(w: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(w.y, -w.x)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub pos: Vector2<f64>,
    pub angle: f64,
    pub omega: f64,
    pub vel: Vector2<f64>,
    /// Acceleration of the frame origin when all generalized accelerations are zero.
    pub bias: Vector2<f64>,
    pub jx: DofVec,
    pub jz: DofVec,
    pub jw: DofVec,
}

impl Frame {
    fn world() -> Self {
        Self {
            pos: Vector2::zeros(),
            angle: 0.0,
            omega: 0.0,
            vel: Vector2::zeros(),
            bias: Vector2::zeros(),
            jx: DofVec::zeros(),
            jz: DofVec::zeros(),
            jw: DofVec::zeros(),
        }
    }

    pub fn point(&self, offset: [f64; 2]) -> PointKin {
        let w = rotate(self.angle, offset);
        let pw = perp(w);
        PointKin {
            pos: self.pos + w,
            vel: self.vel + pw * self.omega,
            bias: self.bias - w * (self.omega * self.omega),
            jx: self.jx + self.jw * pw.x,
            jz: self.jz + self.jw * pw.y,
        }
    }

    /// Translate the frame by `w` (already in world axes) through a rigid offset.
    fn shifted(&self, w: Vector2<f64>) -> Self {
        let pw = perp(w);
        Self {
            pos: self.pos + w,
            vel: self.vel + pw * self.omega,
            bias: self.bias - w * (self.omega * self.omega),
            jx: self.jx + self.jw * pw.x,
            jz: self.jz + self.jw * pw.y,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PointKin {
    pub pos: Vector2<f64>,
    pub vel: Vector2<f64>,
    pub bias: Vector2<f64>,
    pub jx: DofVec,
    pub jz: DofVec,
}

fn slide(frame: &mut Frame, parent_angle: f64, parent_omega: f64, axis: [f64; 2], dof: usize, qd: f64) {
    let a = rotate(parent_angle, axis);
    frame.vel += a * qd;
    frame.bias += perp(a) * (2.0 * parent_omega * qd);
    frame.jx[dof] += a.x;
    frame.jz[dof] += a.y;
}

/// Forward kinematics of every link frame, with Jacobians and velocity-product accelerations.
pub(crate) fn link_frames(model: &ModelSpec, q: &DofVec, v: &DofVec) -> Vec<Frame> {
    let mut frames: Vec<Frame> = Vec::with_capacity(model.links.len());
    let world = Frame::world();
    for link in &model.links {
        let parent = link.parent.map_or(world, |p| frames[p]);
        let frame = match link.joint {
            Joint::Revolute { dof } => {
                let mut f = parent.shifted(rotate(parent.angle, link.anchor));
                f.angle += q[dof];
                f.omega += v[dof];
                f.jw[dof] += 1.0;
                f
            }
            Joint::Prismatic { dof, axis } => {
                let local = [link.anchor[0] + q[dof] * axis[0], link.anchor[1] + q[dof] * axis[1]];
                let mut f = parent.shifted(rotate(parent.angle, local));
                slide(&mut f, parent.angle, parent.omega, axis, dof, v[dof]);
                f
            }
            Joint::Planar { dofs: [dx, dz, dp] } => {
                let local = [link.anchor[0] + q[dx], link.anchor[1] + q[dz]];
                let mut f = parent.shifted(rotate(parent.angle, local));
                slide(&mut f, parent.angle, parent.omega, [1.0, 0.0], dx, v[dx]);
                slide(&mut f, parent.angle, parent.omega, [0.0, 1.0], dz, v[dz]);
                f.angle += q[dp];
                f.omega += v[dp];
                f.jw[dp] += 1.0;
                f
            }
        };
        frames.push(frame);
    }
    frames
}

pub(crate) fn pad(x: &[f64]) -> DofVec {
    let mut out = DofVec::zeros();
    out.as_mut_slice()[..x.len()].copy_from_slice(x);
    out
}

pub(crate) fn check_state(model: &ModelSpec, state: &State) -> Result<()> {
    if state.q.len() != model.ndof || state.v.len() != model.ndof {
        return Err(contract(format!(
            "state has {}/{} entries, model expects {}",
            state.q.len(),
            state.v.len(),
            model.ndof
        )));
    }
    Ok(())
}

pub fn site_pose(model: &ModelSpec, state: &State, site: SiteId) -> Result<SitePose> {
    check_state(model, state)?;
    let s = model
        .sites
        .get(site.0)
        .ok_or_else(|| contract(format!("site index {} out of range", site.0)))?;
    let frames = link_frames(model, &pad(state.q.as_slice()), &pad(state.v.as_slice()));
    let p = frames[s.link].point(s.offset);
    Ok(SitePose { pos: p.pos, vel: p.vel })
}

/// Site poses for several sites from a single kinematics pass.
pub fn site_poses(model: &ModelSpec, state: &State, sites: &[SiteId]) -> Result<Vec<SitePose>> {
    check_state(model, state)?;
    let frames = link_frames(model, &pad(state.q.as_slice()), &pad(state.v.as_slice()));
    sites
        .iter()
        .map(|id| {
            let s = model.sites.get(id.0).ok_or_else(|| contract("site index out of range"))?;
            let p = frames[s.link].point(s.offset);
            Ok(SitePose { pos: p.pos, vel: p.vel })
        })
        .collect()
}

/// Mass-weighted centre of the articulated links (the box is not part of the robot).
pub fn com(model: &ModelSpec, state: &State) -> Result<SitePose> {
    check_state(model, state)?;
    let frames = link_frames(model, &pad(state.q.as_slice()), &pad(state.v.as_slice()));
    Ok(com_from_frames(model, &frames))
}

pub(crate) fn com_from_frames(model: &ModelSpec, frames: &[Frame]) -> SitePose {
    let mut pos = Vector2::zeros();
    let mut vel = Vector2::zeros();
    let mut mass = 0.0;
    for (link, frame) in model.links.iter().zip(frames) {
        let p = frame.point(link.com);
        pos += p.pos * link.mass;
        vel += p.vel * link.mass;
        mass += link.mass;
    }
    SitePose { pos: pos / mass, vel: vel / mass }
}

/// Kinetic plus gravitational potential energy of the links and box (ground at z = 0).
pub fn mechanical_energy(model: &ModelSpec, state: &State) -> Result<f64> {
    check_state(model, state)?;
    let frames = link_frames(model, &pad(state.q.as_slice()), &pad(state.v.as_slice()));
    let mut e = 0.0;
    for (link, frame) in model.links.iter().zip(&frames) {
        let p = frame.point(link.com);
        e += 0.5 * link.mass * p.vel.norm_squared() + 0.5 * link.inertia * frame.omega * frame.omega;
        e += link.mass * model.gravity * p.pos.y;
    }
    if let Some(b) = &model.boxed {
        e += 0.5 * b.mass * state.v[b.dof] * state.v[b.dof];
    }
    Ok(e)
}
