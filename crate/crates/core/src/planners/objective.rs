use nalgebra::{DMatrix, DVector};

use crate::cost::{cost_derivatives, cost_eval, CostSpec, ResidualVector};
use crate::error::Result;
use crate::sim::{ControlVector, ModelSpec, State};

/// Everything a planner needs to score a trajectory: the model, a `CostSpec`, and the residual
/// functions its terms refer to (in term order).
pub trait Objective: Sync {
    fn model(&self) -> &ModelSpec;

    fn cost_spec(&self) -> &CostSpec;

    /// Residual length of each cost term.
    fn residual_dims(&self) -> Vec<usize>;

    /// Fill `out` (laid out per [`Objective::residual_dims`]) at `(state, control)`.
    fn residuals(&self, state: &State, control: &ControlVector, out: &mut ResidualVector) -> Result<()>;

    fn running_cost(&self, state: &State, control: &ControlVector) -> Result<f64> {
        let mut r = ResidualVector::zeros(&self.residual_dims());
        self.residuals(state, control, &mut r)?;
        cost_eval(self.cost_spec(), &r)
    }

    /// Terminal cost: the running cost with the control residuals at zero actuation.
    fn terminal_cost(&self, state: &State) -> Result<f64> {
        self.running_cost(state, &ControlVector::zeros(self.model().nu()))
    }
}

/// Gauss–Newton gradient and Hessian of the running cost over the stacked `[q; v; u]`, with the
/// residual Jacobian taken by central differences.
pub fn cost_expansion(
    objective: &dyn Objective,
    state: &State,
    control: &ControlVector,
) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let n = objective.model().ndof;
    let nu = control.len();
    let dims = objective.residual_dims();
    let mut r0 = ResidualVector::zeros(&dims);
    objective.residuals(state, control, &mut r0)?;
    let nr = r0.len();
    let x0 = state.to_vector();
    let mut jac = DMatrix::zeros(nr, 2 * n + nu);
    let mut rp = ResidualVector::zeros(&dims);
    let mut rm = ResidualVector::zeros(&dims);
    for j in 0..2 * n + nu {
        let base = if j < 2 * n { x0[j] } else { control[j - 2 * n] };
        let h = 1e-6 * base.abs().max(1.0);
        if j < 2 * n {
            let mut xp = x0.clone();
            xp[j] += h;
            let mut xm = x0.clone();
            xm[j] -= h;
            objective.residuals(&State::from_vector(&xp, n, state.t), control, &mut rp)?;
            objective.residuals(&State::from_vector(&xm, n, state.t), control, &mut rm)?;
        } else {
            let mut up = control.clone();
            up[j - 2 * n] += h;
            let mut um = control.clone();
            um[j - 2 * n] -= h;
            objective.residuals(state, &up, &mut rp)?;
            objective.residuals(state, &um, &mut rm)?;
        }
        jac.set_column(j, &((&rp.values - &rm.values) / (2.0 * h)));
    }
    let value = cost_eval(objective.cost_spec(), &r0)?;
    let (g, h) = cost_derivatives(objective.cost_spec(), &r0, &jac)?;
    Ok((value, g, h))
}
