//! Model-predictive-control workbench for a planar biped.
//!
//! The crate is split along the control pipeline: [`sim`] integrates the robot, [`cost`] turns
//! residuals into scalar costs, [`tasks`] defines stand/walk/push, [`planners`] optimises control
//! sequences in a receding horizon, and [`eval`] runs and scores episodes.

pub mod cost;
pub mod error;
pub mod eval;
pub mod planners;
pub mod sim;
pub mod tasks;

pub use error::{Error, Result};
