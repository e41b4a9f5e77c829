//! Predictive sampling: perturb the nominal knots with Gaussian noise, roll every candidate out,
//! keep the cheapest. The nominal itself is always candidate 0, so the cost never increases.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{contract, Result};
use crate::sim::State;

use super::config::PlannerConfig;
use super::objective::Objective;
use super::plan::Plan;
use super::rollout::rollout;
use super::PlanOutcome;

pub fn sampling_plan<R: Rng + ?Sized>(
    objective: &dyn Objective,
    state: &State,
    nominal: &Plan,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlanOutcome> {
    config.validate()?;
    if nominal.knots.len() != config.knots || (nominal.horizon - config.horizon_s).abs() > 1e-9 {
        return Err(contract("nominal plan does not match the configured knots/horizon"));
    }
    let limits = objective.model().actuator_limits();
    let noise: Vec<Normal<f64>> = limits
        .iter()
        .map(|l| Normal::new(0.0, config.noise_scale * 2.0 * l).map_err(|e| contract(e.to_string())))
        .collect::<Result<_>>()?;

    let mut incumbent = Plan { nominal: None, gains: None, ..nominal.clone() };
    incumbent.clamp(&limits);
    let mut incumbent_cost = rollout(objective, state, &incumbent)?.cost;
    let initial_cost = incumbent_cost;
    let mut accepted = Vec::new();

    for _ in 0..config.iterations {
        // Draw every perturbation up front so the random stream does not depend on evaluation order.
        let mut candidates = Vec::with_capacity(config.candidates);
        candidates.push(incumbent.clone());
        for _ in 1..config.candidates {
            let mut c = incumbent.clone();
            for knot in &mut c.knots {
                for (u, dist) in knot.iter_mut().zip(&noise) {
                    *u += dist.sample(rng);
                }
            }
            c.clamp(&limits);
            candidates.push(c);
        }
        let costs = candidates
            .iter()
            .map(|c| rollout(objective, state, c).map(|r| r.cost))
            .collect::<Result<Vec<f64>>>()?;
        let (winner, &cost) = costs
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.total_cmp(b).then(i.cmp(j)))
            .expect("at least two candidates");
        if winner != 0 {
            incumbent = candidates.swap_remove(winner);
            incumbent_cost = cost;
            accepted.push(cost);
        }
    }
    Ok(PlanOutcome {
        degraded: !incumbent_cost.is_finite(),
        plan: incumbent,
        cost: incumbent_cost,
        initial_cost,
        accepted_costs: accepted,
        iterations: config.iterations,
    })
}
