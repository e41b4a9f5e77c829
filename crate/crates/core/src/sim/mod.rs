//! Planar articulated rigid-body simulation with soft ground contact.

mod biped;
mod dynamics;
mod kinematics;
mod model;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use biped::{dof, BipedParams, BoxParams};
pub use dynamics::{contact_report, linearize, linearize_with_step, step, ContactReport};
pub use kinematics::{com, mechanical_energy, site_pose, site_poses, SitePose};
pub use model::{Actuator, BoxSpec, ContactParams, Joint, Link, ModelSpec, Site, SiteId, MAX_DOF};

/// One actuation value per actuator, in the model's actuator order.
pub type ControlVector = DVector<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub q: DVector<f64>,
    pub v: DVector<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(ndof: usize) -> Self {
        Self { q: DVector::zeros(ndof), v: DVector::zeros(ndof), t: 0.0 }
    }

    /// Stacked `[q; v]`.
    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.q.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.q[i] } else { self.v[i - n] })
    }

    pub fn from_vector(x: &DVector<f64>, ndof: usize, t: f64) -> Self {
        Self {
            q: x.rows(0, ndof).into_owned(),
            v: x.rows(ndof, ndof).into_owned(),
            t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.v.iter()).all(|x| x.is_finite()) && self.t.is_finite()
    }
}
