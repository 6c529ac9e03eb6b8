//! Synthetic 2-D driving pipeline: a GMM trajectory predictor feeding a
//! sampling-based planner, with uncertainty-aware cost designs. Serves as a
//! deterministic, seedable test subject for robustness analysis.

pub mod dynamics;
pub mod episode;
pub mod pipeline;
pub mod planner;
pub mod predictor;
pub mod scenario;

pub use episode::{
    evaluate_episode, evaluate_episode_with_source, EpisodeParams, EpisodeRecord, EvalCost,
    PredictionSource, SigmaChoice,
};
pub use pipeline::{default_perturbation_space, design_label, driving_pipeline, gt_reference_cost};
pub use planner::{cost_terms, design_cost, plan, CostDesign, PlannedTrajectory, PlannerParams};
pub use predictor::{predict, GmmPrediction};
pub use scenario::{
    generate_scenarios, perturb_input, DrivingScenario, PerturbationVector, ScenarioGenParams,
};
