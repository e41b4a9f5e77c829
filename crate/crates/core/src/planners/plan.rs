use nalgebra::{DMatrix, DVector};

use crate::error::{contract, Result};
use crate::sim::{ControlVector, State};

/// Control trajectory over a planning horizon, as piecewise-linear knots on a uniform time grid
/// spanning `[0, horizon]`. iLQG plans also carry the nominal states and feedback gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub horizon: f64,
    pub knots: Vec<ControlVector>,
    /// Nominal state at each control step, `x_0 ..= x_T`.
    pub nominal: Option<Vec<State>>,
    /// Feedback gain (nu × nx) for each control step `0..T`.
    pub gains: Option<Vec<DMatrix<f64>>>,
}

impl Plan {
    pub fn zeros(horizon: f64, knots: usize, nu: usize) -> Result<Self> {
        if !(horizon > 0.0) || knots < 2 {
            return Err(contract("a plan needs a positive horizon and at least two knots"));
        }
        Ok(Self { horizon, knots: vec![DVector::zeros(nu); knots], nominal: None, gains: None })
    }

    pub fn knot_times(&self) -> Vec<f64> {
        let k = self.knots.len();
        (0..k).map(|i| self.horizon * i as f64 / (k - 1) as f64).collect()
    }

    /// Linear interpolation between knots; times outside the horizon hold the end values.
    pub fn sample(&self, t: f64) -> ControlVector {
        let k = self.knots.len();
        let s = (t / self.horizon).clamp(0.0, 1.0) * (k - 1) as f64;
        let i = (s.floor() as usize).min(k - 2);
        let w = s - i as f64;
        if w <= 0.0 {
            return self.knots[i].clone();
        }
        &self.knots[i] * (1.0 - w) + &self.knots[i + 1] * w
    }

    /// The plan as seen `dt` later: every knot resampled at `t + dt`, the tail held at the last knot.
    /// Gains and nominal states move by whole control steps (first dropped, last duplicated).
    pub fn shifted(&self, dt: f64) -> Self {
        let knots = self.knot_times().into_iter().map(|t| self.sample(t + dt)).collect();
        Self {
            horizon: self.horizon,
            knots,
            nominal: self.nominal.as_deref().map(shift_steps),
            gains: self.gains.as_deref().map(shift_steps),
        }
    }

    /// Per-step controls `u_0 .. u_{steps-1}` at spacing `dt`.
    pub fn step_controls(&self, steps: usize, dt: f64) -> Vec<ControlVector> {
        (0..steps).map(|t| self.sample(t as f64 * dt)).collect()
    }

    pub fn clamp(&mut self, limits: &[f64]) {
        for k in &mut self.knots {
            for (u, l) in k.iter_mut().zip(limits) {
                *u = u.clamp(-l, *l);
            }
        }
    }
}

fn shift_steps<T: Clone>(v: &[T]) -> Vec<T> {
    let mut out = v[1.min(v.len())..].to_vec();
    if let Some(last) = v.last() {
        out.push(last.clone());
    }
    out
}

/// Planning horizon expressed in whole control steps.
pub fn horizon_steps(horizon: f64, dt: f64) -> usize {
    ((horizon / dt).round() as usize).max(1)
}
