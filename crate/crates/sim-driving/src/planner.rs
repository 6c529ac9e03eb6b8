//! Sampling-based ego planner and the uncertainty-aware cost designs.
//!
//! Candidates are cubic Hermite position polynomials from the ego state to
//! sampled lane-relative endpoints, kept only when the implied speeds and
//! controls respect the vehicle limits. The planner scores each candidate
//! with the selected cost design against the predicted agent trajectory and
//! returns the cheapest (lowest sample index on ties).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    distance, point_at_arclength, polyline_length, project_to_polyline, wrap_angle, Control,
    UnicycleState,
};
use crate::scenario::DrivingScenario;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("none of the {attempted} sampled trajectories was dynamically feasible")]
    NoFeasibleSample { attempted: usize },
}

/// Planner limits and sampling spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub n_samples: usize,
    pub max_speed: f64,
    pub max_accel: f64,
    pub max_steer_rate: f64,
    pub safety_radius: f64,
    pub lateral_spread: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            n_samples: 96,
            max_speed: 15.0,
            max_accel: 4.5,
            max_steer_rate: 1.3,
            safety_radius: 2.0,
            lateral_spread: 4.5,
        }
    }
}

/// A candidate or selected ego trajectory over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTrajectory {
    pub states: Vec<UnicycleState>,
    pub controls: Vec<Control>,
}

impl PlannedTrajectory {
    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.states.iter().map(|s| s.position()).collect()
    }
}

/// The five internal cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerCostTerms {
    pub collision: f64,
    pub goal: f64,
    pub lane_lateral: f64,
    pub lane_heading: f64,
    pub control_effort: f64,
}

impl PlannerCostTerms {
    /// Plain sum of the five terms.
    pub fn total(&self) -> f64 {
        self.collision + self.goal + self.lane_lateral + self.lane_heading + self.control_effort
    }
}

/// Uncertainty-aware cost designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostDesign {
    /// The plain five-term sum; ignores the uncertainty measure.
    Baseline,
    /// Inflates the collision term by `exp(α·σ)`.
    Avoid,
    /// Shifts weight from prediction-dependent terms to lane keeping as
    /// uncertainty grows.
    Lane,
}

impl CostDesign {
    pub fn name(&self) -> &'static str {
        match self {
            CostDesign::Baseline => "baseline",
            CostDesign::Avoid => "avoid",
            CostDesign::Lane => "lane",
        }
    }
}

impl std::str::FromStr for CostDesign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(CostDesign::Baseline),
            "avoid" => Ok(CostDesign::Avoid),
            "lane" => Ok(CostDesign::Lane),
            other => Err(format!("unknown design '{other}'")),
        }
    }
}

/// Cost terms of a candidate plan against a predicted (or true) agent
/// trajectory.
///
/// Collision: `Σ_t exp(−d_t² / 2r²)`. Goal: final distance to the goal.
/// Lane terms: mean squared lateral offset and heading error. Control:
/// mean squared control magnitude.
pub fn cost_terms(
    plan: &PlannedTrajectory,
    agent_trajectory: &[[f64; 2]],
    scenario: &DrivingScenario,
    safety_radius: f64,
) -> PlannerCostTerms {
    let t_steps = plan.states.len();
    let mut collision = 0.0;
    for (state, agent) in plan.states.iter().zip(agent_trajectory) {
        let d = distance(state.position(), *agent);
        collision += (-d * d / (2.0 * safety_radius * safety_radius)).exp();
    }
    let goal = distance(plan.states[t_steps - 1].position(), scenario.goal);
    let mut lateral = 0.0;
    let mut heading = 0.0;
    for state in &plan.states {
        let proj = project_to_polyline(&scenario.lane, state.position());
        lateral += proj.distance * proj.distance;
        let err = wrap_angle(state.heading - proj.heading);
        heading += err * err;
    }
    let control_effort = plan
        .controls
        .iter()
        .map(|c| c.accel * c.accel + c.steer_rate * c.steer_rate)
        .sum::<f64>()
        / plan.controls.len() as f64;
    PlannerCostTerms {
        collision,
        goal,
        lane_lateral: lateral / t_steps as f64,
        lane_heading: heading / t_steps as f64,
        control_effort,
    }
}

/// Applies one cost design to the five terms at uncertainty `sigma1`.
///
/// Baseline ignores `sigma1`. The lane design clamps `sigma1` at 1 − 1e−3 to
/// avoid its pole.
pub fn design_cost(
    terms: &PlannerCostTerms,
    sigma1: f64,
    design: CostDesign,
    alpha_scale: f64,
) -> f64 {
    debug_assert!((0.0..=1.0).contains(&sigma1), "sigma1 must lie in [0, 1]");
    match design {
        CostDesign::Baseline => terms.total(),
        CostDesign::Avoid => {
            (alpha_scale * sigma1).exp() * terms.collision
                + terms.goal
                + terms.lane_lateral
                + terms.lane_heading
                + terms.control_effort
        }
        CostDesign::Lane => {
            let s = sigma1.min(1.0 - 1e-3);
            s * (terms.collision + terms.goal)
                + (terms.lane_lateral + terms.lane_heading + terms.control_effort) / (1.0 - s)
        }
    }
}

/// Evaluates a cubic Hermite segment and its derivative at `s ∈ [0, 1]`.
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, s: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * m1;
    let deriv = (6.0 * s2 - 6.0 * s) * p0
        + (3.0 * s2 - 4.0 * s + 1.0) * m0
        + (-6.0 * s2 + 6.0 * s) * p1
        + (3.0 * s2 - 2.0 * s) * m1;
    (value, deriv)
}

/// Samples one cubic trajectory toward a lane-relative endpoint; `None` when
/// it violates the speed or control limits.
fn sample_candidate(
    scenario: &DrivingScenario,
    params: &PlannerParams,
    rng: &mut ChaCha20Rng,
) -> Option<PlannedTrajectory> {
    let t_final = scenario.horizon_steps as f64 * scenario.dt;
    let ego = scenario.ego;
    let ego_arc = project_to_polyline(&scenario.lane, ego.position()).arclength;
    let lane_len = polyline_length(&scenario.lane);

    let progress = rng.random_range(0.4..1.15) * (ego.speed * t_final).max(4.0);
    let lateral = rng.random_range(-params.lateral_spread..params.lateral_spread);
    let end_speed =
        (rng.random_range(0.45..1.15_f64) * ego.speed).clamp(0.0, params.max_speed);

    let (on_lane, lane_heading) = point_at_arclength(
        &scenario.lane,
        (ego_arc + progress).min(lane_len),
    );
    let normal = [-lane_heading.sin(), lane_heading.cos()];
    let end_pos = [
        on_lane[0] + lateral * normal[0],
        on_lane[1] + lateral * normal[1],
    ];

    // Hermite boundary tangents are velocities scaled by the duration.
    let m0 = [
        ego.speed * ego.heading.cos() * t_final,
        ego.speed * ego.heading.sin() * t_final,
    ];
    let m1 = [
        end_speed * lane_heading.cos() * t_final,
        end_speed * lane_heading.sin() * t_final,
    ];

    let mut states = Vec::with_capacity(scenario.horizon_steps);
    let mut prev_heading = ego.heading;
    let mut prev_speed = ego.speed;
    let mut controls = Vec::with_capacity(scenario.horizon_steps);
    for k in 1..=scenario.horizon_steps {
        let s = k as f64 / scenario.horizon_steps as f64;
        let (x, dx) = hermite(ego.x, m0[0], end_pos[0], m1[0], s);
        let (y, dy) = hermite(ego.y, m0[1], end_pos[1], m1[1], s);
        let speed = (dx * dx + dy * dy).sqrt() / t_final;
        let heading = if speed > 1e-6 {
            dy.atan2(dx)
        } else {
            prev_heading
        };
        let accel = (speed - prev_speed) / scenario.dt;
        let steer_rate = wrap_angle(heading - prev_heading) / scenario.dt;
        if speed > params.max_speed
            || accel.abs() > params.max_accel
            || steer_rate.abs() > params.max_steer_rate
        {
            return None;
        }
        states.push(UnicycleState {
            x,
            y,
            heading,
            speed,
        });
        controls.push(Control { accel, steer_rate });
        prev_heading = heading;
        prev_speed = speed;
    }
    Some(PlannedTrajectory { states, controls })
}

/// Samples feasible candidates in order; rejected samples keep consuming the
/// seed stream so candidate `i` is stable regardless of later parameters.
pub fn sample_trajectories(
    scenario: &DrivingScenario,
    params: &PlannerParams,
    seed: u64,
) -> Vec<PlannedTrajectory> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..params.n_samples)
        .filter_map(|_| sample_candidate(scenario, params, &mut rng))
        .collect()
}

/// Plans by exhaustive scoring of the sampled candidates.
///
/// `agent_prediction` is the mean trajectory the collision term sees;
/// `sigma1` the uncertainty the design consumes.
pub fn plan(
    scenario: &DrivingScenario,
    agent_prediction: &[[f64; 2]],
    sigma1: f64,
    design: CostDesign,
    alpha_scale: f64,
    params: &PlannerParams,
    seed: u64,
) -> Result<(PlannedTrajectory, f64), PlanError> {
    let candidates = sample_trajectories(scenario, params, seed);
    if candidates.is_empty() {
        return Err(PlanError::NoFeasibleSample {
            attempted: params.n_samples,
        });
    }
    let mut best_index = 0;
    let mut best_cost = f64::INFINITY;
    for (i, candidate) in candidates.iter().enumerate() {
        let terms = cost_terms(candidate, agent_prediction, scenario, params.safety_radius);
        let cost = design_cost(&terms, sigma1, design, alpha_scale);
        if cost < best_cost {
            best_cost = cost;
            best_index = i;
        }
    }
    Ok((candidates[best_index].clone(), best_cost))
}
