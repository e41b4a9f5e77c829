//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export returns flat `f64` arrays so the page can plot them without a serializer.

use horizon_bench::cost::{reward_to_cost, Norm};
use horizon_bench::planners::{Agent, PlannerConfig};
use horizon_bench::sim::step;
use horizon_bench::tasks::reward::{tolerance, Sigmoid};
use horizon_bench::tasks::{hb_reward, initial_state, CostVariant, Probe, TaskId, TaskSpec};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Samples a norm on `[lo, hi]`: `[x, n(x), n'(x), n''(x)]` per point, flattened.
///
/// `p <= 0` selects the quadratic norm, otherwise smooth-abs with that `p`.
#[wasm_bindgen]
pub fn norm_curve(p: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let norm = if p > 0.0 { Norm::smooth_abs(p) } else { Norm::quadratic() };
    let mut out = Vec::with_capacity(4 * n);
    for x in grid(lo, hi, n) {
        let v = norm.eval(x).map_err(js_err)?;
        out.extend([x, v.value, v.d1, v.d2]);
    }
    Ok(out)
}

/// `[r, cost(r)]` pairs for rewards in `[0, r_max]` under the reward-to-cost transform.
#[wasm_bindgen]
pub fn reward_cost_curve(r_max: f64, p: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let mut out = Vec::with_capacity(2 * n);
    for r in grid(0.0, r_max, n) {
        out.extend([r, reward_to_cost(r, r_max, p).map_err(js_err)?]);
    }
    Ok(out)
}

/// `[x, tolerance(x)]` pairs. `gaussian` picks the sigmoid; otherwise quadratic.
#[wasm_bindgen]
pub fn tolerance_curve(lower: f64, upper: f64, margin: f64, gaussian: bool, value_at_margin: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let sigmoid = if gaussian { Sigmoid::Gaussian } else { Sigmoid::Quadratic };
    grid(lo, hi, n).flat_map(|x| [x, tolerance(x, lower, upper, margin, sigmoid, value_at_margin)]).collect()
}

/// Runs a short stand or walk episode with iLQG and returns one row per control step:
/// `[t, head height, com x, com vx, reward]`, flattened. Stops early if the simulation diverges.
#[wasm_bindgen]
pub fn rollout(task: &str, variant: &str, seconds: f64, iterations: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let id: TaskId = task.parse().map_err(js_err)?;
    if id == TaskId::Push {
        return Err(JsError::new("the demo rollout supports stand and walk"));
    }
    let spec = TaskSpec::with_defaults(id, variant.parse::<CostVariant>().map_err(js_err)?).map_err(js_err)?;
    let steps = spec.episode_steps(seconds).map_err(js_err)?;
    let config = PlannerConfig { iterations, ..PlannerConfig::default() };
    let mut agent = Agent::new(config, seed).map_err(js_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = initial_state(&spec, &mut rng);
    let goal = spec.initial_goal();
    let objective = spec.objective(goal);
    let mut out = Vec::with_capacity(5 * steps);
    for _ in 0..steps {
        let u = agent.step(&objective, &state).map_err(js_err)?;
        let Ok(next) = step(&spec.model, &state, &u) else { break };
        let reward = hb_reward(&next, &u, &spec, &goal).map_err(js_err)?;
        let p = Probe::new(&spec, &next).map_err(js_err)?;
        out.extend([next.t, p.head.pos.y, p.com.pos.x, p.com.vel.x, reward]);
        state = next;
    }
    Ok(out)
}
