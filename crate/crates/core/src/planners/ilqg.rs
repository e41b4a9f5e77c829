//! Iterative LQG with Gauss–Newton cost expansions, Levenberg–Marquardt regularisation of the
//! control Hessian, and a backtracking line search that only accepts strict cost decreases.

use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Result};
use crate::sim::{linearize, ControlVector, State};

use super::config::PlannerConfig;
use super::objective::{cost_expansion, Objective};
use super::plan::{horizon_steps, Plan};
use super::rollout::{rollout_controls, rollout_with, Rollout};
use super::PlanOutcome;

struct Expansion {
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    lx: Vec<DVector<f64>>,
    lu: Vec<DVector<f64>>,
    lxx: Vec<DMatrix<f64>>,
    luu: Vec<DMatrix<f64>>,
    lux: Vec<DMatrix<f64>>,
}

fn expand(objective: &dyn Objective, nominal: &Rollout) -> Result<Expansion> {
    let model = objective.model();
    let nx = model.nx();
    let nu = model.nu();
    let steps = nominal.controls.len();
    let mut e = Expansion {
        a: Vec::with_capacity(steps),
        b: Vec::with_capacity(steps),
        lx: Vec::with_capacity(steps + 1),
        lu: Vec::with_capacity(steps),
        lxx: Vec::with_capacity(steps + 1),
        luu: Vec::with_capacity(steps),
        lux: Vec::with_capacity(steps),
    };
    for t in 0..=steps {
        let u = if t < steps { nominal.controls[t].clone() } else { ControlVector::zeros(nu) };
        let (_, g, h) = cost_expansion(objective, &nominal.states[t], &u)?;
        e.lx.push(g.rows(0, nx).into_owned());
        e.lxx.push(h.view((0, 0), (nx, nx)).into_owned());
        if t < steps {
            let (a, b) = linearize(model, &nominal.states[t], &u)?;
            e.a.push(a);
            e.b.push(b);
            e.lu.push(g.rows(nx, nu).into_owned());
            e.luu.push(h.view((nx, nx), (nu, nu)).into_owned());
            e.lux.push(h.view((nx, 0), (nu, nx)).into_owned());
        }
    }
    Ok(e)
}

/// Feedforward terms `k_t` and gains `K_t`, or `None` if a regularised control Hessian is not
/// positive definite or anything turns non-finite.
fn backward(e: &Expansion, reg: f64) -> Option<(Vec<DVector<f64>>, Vec<DMatrix<f64>>)> {
    let steps = e.a.len();
    let mut vx = e.lx[steps].clone();
    let mut vxx = e.lxx[steps].clone();
    let mut ks = vec![DVector::zeros(0); steps];
    let mut gains = vec![DMatrix::zeros(0, 0); steps];
    for t in (0..steps).rev() {
        let (a, b) = (&e.a[t], &e.b[t]);
        let at = a.transpose();
        let bt = b.transpose();
        let qx = &e.lx[t] + &at * &vx;
        let qu = &e.lu[t] + &bt * &vx;
        let vxx_a = &vxx * a;
        let qxx = &e.lxx[t] + &at * &vxx_a;
        let quu = &e.luu[t] + &bt * &vxx * b;
        let qux = &e.lux[t] + &bt * &vxx_a;
        let nu = quu.nrows();
        let reg_quu = &quu + DMatrix::identity(nu, nu) * reg;
        let chol = reg_quu.cholesky()?;
        let k = -chol.solve(&qu);
        let gain = -chol.solve(&qux);
        let gt = gain.transpose();
        vx = &qx + &gt * &quu * &k + &gt * &qu + qux.transpose() * &k;
        let v = &qxx + &gt * &quu * &gain + &gt * &qux + qux.transpose() * &gain;
        vxx = (&v + v.transpose()) * 0.5;
        if !(k.iter().all(|x| x.is_finite()) && vxx.iter().all(|x| x.is_finite())) {
            return None;
        }
        ks[t] = k;
        gains[t] = gain;
    }
    Some((ks, gains))
}

fn forward(
    objective: &dyn Objective,
    nominal: &Rollout,
    ks: &[DVector<f64>],
    gains: &[DMatrix<f64>],
    alpha: f64,
) -> Result<Rollout> {
    let steps = nominal.controls.len();
    rollout_with(objective, &nominal.states[0], steps, |t, x| {
        let dx = x.to_vector() - nominal.states[t].to_vector();
        Ok(&nominal.controls[t] + &ks[t] * alpha + &gains[t] * dx)
    })
}

fn escalate(reg: f64, config: &PlannerConfig) -> f64 {
    if reg > 0.0 {
        reg * config.regularization_scale
    } else {
        1e-9
    }
}

fn plan_from(rollout: &Rollout, horizon: f64, gains: Option<Vec<DMatrix<f64>>>) -> Plan {
    let mut knots = rollout.controls.clone();
    if let Some(last) = knots.last().cloned() {
        knots.push(last);
    }
    Plan { horizon, knots, nominal: Some(rollout.states.clone()), gains }
}

pub fn ilqg_plan(objective: &dyn Objective, state: &State, warm: &Plan, config: &PlannerConfig) -> Result<PlanOutcome> {
    config.validate()?;
    let dt = objective.model().control_dt;
    let steps = horizon_steps(config.horizon_s, dt);
    let horizon = steps as f64 * dt;
    if (warm.horizon - horizon).abs() > 1e-9 && (warm.horizon - config.horizon_s).abs() > 1e-9 {
        return Err(contract(format!("warm start horizon {} does not match the configured {}", warm.horizon, horizon)));
    }
    let controls: Vec<ControlVector> = (0..steps).map(|t| warm.sample(t as f64 * warm.horizon / steps as f64)).collect();
    let mut best = rollout_controls(objective, state, &controls)?;
    let initial_cost = best.cost;
    let degraded = |warm: &Plan, best: &Rollout, iterations| PlanOutcome {
        plan: Plan { horizon, ..warm.clone() },
        cost: best.cost,
        initial_cost,
        accepted_costs: vec![],
        degraded: true,
        iterations,
    };
    if best.diverged {
        return Ok(degraded(warm, &best, 0));
    }

    let mut reg = config.regularization_init;
    let mut accepted = Vec::new();
    let mut gains_out = None;
    let mut expansion: Option<Expansion> = None;
    for iter in 0..config.iterations {
        if expansion.is_none() {
            expansion = Some(expand(objective, &best)?);
        }
        let e = expansion.as_ref().unwrap();
        let (ks, gains) = loop {
            match backward(e, reg) {
                Some(kg) => break kg,
                None => {
                    reg = escalate(reg, config);
                    if reg > config.regularization_max {
                        return Ok(degraded(warm, &best, iter + 1));
                    }
                }
            }
        };
        let mut improved = None;
        let mut alpha = 1.0;
        for _ in 0..config.line_search_steps {
            let candidate = forward(objective, &best, &ks, &gains, alpha)?;
            if candidate.cost < best.cost {
                improved = Some(candidate);
                break;
            }
            alpha *= 0.5;
        }
        match improved {
            Some(candidate) => {
                best = candidate;
                accepted.push(best.cost);
                expansion = None;
                reg = (reg / config.regularization_scale).max(config.regularization_min);
            }
            None => {
                reg = escalate(reg, config).min(config.regularization_max);
            }
        }
        gains_out = Some(gains);
    }
    Ok(PlanOutcome {
        plan: plan_from(&best, horizon, gains_out),
        cost: best.cost,
        initial_cost,
        accepted_costs: accepted,
        degraded: false,
        iterations: config.iterations,
    })
}
