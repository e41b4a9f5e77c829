use nalgebra::{DMatrix, DVector, SMatrix};

use super::kinematics::{check_state, link_frames, pad, DofVec};
use super::model::{ModelSpec, MAX_DOF};
use super::{ControlVector, State};
use crate::error::{contract, Error, Result};

type DofMat = SMatrix<f64, MAX_DOF, MAX_DOF>;

/// Per-substep breakdown of the contact forces, exposed for invariant checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactReport {
    /// (site index, penetration m, normal force N, tangential force N)
    pub ground: Vec<(usize, f64, f64, f64)>,
    /// Force applied to the box by the pusher sites (N, +x positive).
    pub box_push: f64,
}

#[inline]
fn add_outer(m: &mut DofMat, a: &DofVec, scale: f64) {
    if scale != 0.0 {
        m.ger(scale, a, a, 1.0);
    }
}

pub(crate) fn clamp_control(model: &ModelSpec, control: &ControlVector) -> Result<DVector<f64>> {
    if control.len() != model.nu() {
        return Err(contract(format!("control has {} entries, model has {} actuators", control.len(), model.nu())));
    }
    if control.iter().any(|u| !u.is_finite()) {
        return Err(contract("control contains non-finite entries"));
    }
    Ok(DVector::from_iterator(
        control.len(),
        model.actuators.iter().zip(control.iter()).map(|(a, &u)| u.clamp(-a.limit, a.limit)),
    ))
}

/// One semi-implicit Euler substep. Velocity-proportional forces (contact damping, smoothed
/// friction, joint damping) are linearised and folded into the solve so stiff damping stays stable.
fn substep(model: &ModelSpec, q: &mut DofVec, v: &mut DofVec, tau: &DVector<f64>, report: Option<&mut ContactReport>) {
    let dt = model.physics_dt;
    let frames = link_frames(model, q, v);
    let mut mass = DofMat::zeros();
    let mut damp = DofMat::zeros();
    let mut force = DofVec::zeros();

    for (link, frame) in model.links.iter().zip(&frames) {
        let p = frame.point(link.com);
        add_outer(&mut mass, &p.jx, link.mass);
        add_outer(&mut mass, &p.jz, link.mass);
        add_outer(&mut mass, &frame.jw, link.inertia);
        force += p.jx * (-link.mass * p.bias.x);
        force += p.jz * (link.mass * (-model.gravity - p.bias.y));
    }

    for (act, u) in model.actuators.iter().zip(tau.iter()) {
        force[act.dof] += u;
        mass[(act.dof, act.dof)] += model.armature;
        if model.joint_damping > 0.0 {
            force[act.dof] -= model.joint_damping * v[act.dof];
            damp[(act.dof, act.dof)] += model.joint_damping;
        }
    }

    let c = &model.contact;
    let mut log = report;
    for &s in &model.contact_sites {
        let site = &model.sites[s];
        let pk = frames[site.link].point(site.offset);
        let pen = -pk.pos.y;
        if pen <= 0.0 {
            continue;
        }
        let normal = c.stiffness * pen - c.damping * pk.vel.y;
        if normal <= 0.0 {
            if let Some(r) = log.as_deref_mut() {
                r.ground.push((s, pen, 0.0, 0.0));
            }
            continue;
        }
        let th = (pk.vel.x / c.smoothing_velocity).tanh();
        let tangential = -c.friction * normal * th;
        force += pk.jz * normal + pk.jx * tangential;
        add_outer(&mut damp, &pk.jz, c.damping);
        add_outer(&mut damp, &pk.jx, c.friction * normal * (1.0 - th * th) / c.smoothing_velocity);
        if let Some(r) = log.as_deref_mut() {
            r.ground.push((s, pen, normal, tangential));
        }
    }

    if let Some(b) = &model.boxed {
        let bd = b.dof;
        mass[(bd, bd)] += b.mass;
        let normal = b.mass * model.gravity;
        let th = (v[bd] / c.smoothing_velocity).tanh();
        force[bd] -= b.friction * normal * th;
        damp[(bd, bd)] += b.friction * normal * (1.0 - th * th) / c.smoothing_velocity;

        let center = q[bd];
        let mut pushed = 0.0;
        for &s in &b.pushers {
            let site = &model.sites[s];
            let pk = frames[site.link].point(site.offset);
            let (hx, hz) = (pk.pos.x, pk.pos.y);
            if hz < 0.0 || hz > b.height || (hx - center).abs() >= b.half_width {
                continue;
            }
            // Push out through the nearer face: +1 means the hand sits behind the box (pushing +x).
            let dir = if hx < center { 1.0 } else { -1.0 };
            let pen = b.half_width - dir * (center - hx);
            let pen_rate = dir * (pk.vel.x - v[bd]);
            let f = b.pusher_stiffness * pen + b.pusher_damping * pen_rate;
            if f <= 0.0 {
                continue;
            }
            let mut rel = pk.jx;
            rel[bd] -= 1.0;
            force += pk.jx * (-dir * f);
            force[bd] += dir * f;
            add_outer(&mut damp, &rel, b.pusher_damping);
            pushed += dir * f;
        }
        if let Some(r) = log.as_deref_mut() {
            r.box_push = pushed;
        }
    }

    let mut lhs = mass + damp * dt;
    for i in model.ndof..MAX_DOF {
        lhs[(i, i)] = 1.0;
    }
    let dv = match lhs.cholesky() {
        Some(ch) => ch.solve(&(force * dt)),
        None => DofVec::from_element(f64::NAN),
    };
    *v += dv;
    *q += *v * dt;
}

/// Advance one control timestep (several physics substeps) under a clamped, zero-order-held control.
pub fn step(model: &ModelSpec, state: &State, control: &ControlVector) -> Result<State> {
    check_state(model, state)?;
    let tau = clamp_control(model, control)?;
    let mut q = pad(state.q.as_slice());
    let mut v = pad(state.v.as_slice());
    for k in 0..model.substeps() {
        substep(model, &mut q, &mut v, &tau, None);
        let n = model.ndof;
        if q.rows(0, n).iter().chain(v.rows(0, n).iter()).any(|x| !x.is_finite()) {
            return Err(Error::Diverged { substep: k });
        }
    }
    Ok(State {
        q: DVector::from_column_slice(&q.as_slice()[..model.ndof]),
        v: DVector::from_column_slice(&v.as_slice()[..model.ndof]),
        t: state.t + model.control_dt,
    })
}

/// Contact forces the next substep would apply from `state` (no integration).
pub fn contact_report(model: &ModelSpec, state: &State, control: &ControlVector) -> Result<ContactReport> {
    check_state(model, state)?;
    let tau = clamp_control(model, control)?;
    let mut q = pad(state.q.as_slice());
    let mut v = pad(state.v.as_slice());
    let mut report = ContactReport::default();
    substep(model, &mut q, &mut v, &tau, Some(&mut report));
    Ok(report)
}

/// Central-difference Jacobians of `step` with respect to the stacked state `[q; v]` and the control.
pub fn linearize(model: &ModelSpec, state: &State, control: &ControlVector) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    linearize_with_step(model, state, control, 1e-6)
}

/// As [`linearize`], with the relative perturbation size exposed.
pub fn linearize_with_step(
    model: &ModelSpec,
    state: &State,
    control: &ControlVector,
    rel_eps: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = model.ndof;
    let nx = 2 * n;
    let nu = model.nu();
    step(model, state, control)?;
    let x0 = state.to_vector();
    let mut a = DMatrix::zeros(nx, nx);
    let mut b = DMatrix::zeros(nx, nu);
    for j in 0..nx {
        let h = rel_eps * x0[j].abs().max(1.0);
        let mut xp = x0.clone();
        xp[j] += h;
        let mut xm = x0.clone();
        xm[j] -= h;
        let fp = step(model, &State::from_vector(&xp, n, state.t), control)?.to_vector();
        let fm = step(model, &State::from_vector(&xm, n, state.t), control)?.to_vector();
        a.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    for j in 0..nu {
        let h = rel_eps * control[j].abs().max(1.0);
        let mut up = control.clone();
        up[j] += h;
        let mut um = control.clone();
        um[j] -= h;
        let fp = step(model, state, &up)?.to_vector();
        let fm = step(model, state, &um)?.to_vector();
        b.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    Ok((a, b))
}
