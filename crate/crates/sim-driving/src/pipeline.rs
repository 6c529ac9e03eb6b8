//! The driving stack as a `SystemPipeline`: predictor and planner stages
//! behind the perturbation-injection hook, scored by the chosen system cost.

use robspec_core::levelset::{DimRange, PerturbationSpace};
use robspec_core::robustness::{expected_cost, ScenarioSet, Signal, SystemPipeline};

use crate::episode::{evaluate_plan, EpisodeParams, EvalCost, PredictionSource, SigmaChoice};
use crate::planner::{plan, CostDesign, PlannedTrajectory};
use crate::predictor::predict;
use crate::scenario::{
    perturb_input, DrivingScenario, PerturbationVector, EPS_ACCEL_BOUND, EPS_OMEGA_BOUND,
};

/// The perturbation box: acceleration error ±5 m/s², steering-rate error ±π.
pub fn default_perturbation_space(grid_points_per_dim: usize) -> PerturbationSpace<f64> {
    PerturbationSpace::new(
        vec![
            DimRange {
                name: "eps_accel".into(),
                lower: -EPS_ACCEL_BOUND,
                upper: EPS_ACCEL_BOUND,
            },
            DimRange {
                name: "eps_omega".into(),
                lower: -EPS_OMEGA_BOUND,
                upper: EPS_OMEGA_BOUND,
            },
        ],
        grid_points_per_dim,
    )
    .expect("static bounds are valid")
}

/// Human-readable design label, e.g. `baseline`, `avoid-ml`, `lane-k`.
pub fn design_label(design: CostDesign, sigma_choice: SigmaChoice) -> String {
    match design {
        CostDesign::Baseline => "baseline".to_string(),
        _ => format!("{}-{}", design.name(), sigma_choice.name()),
    }
}

/// Builds the two-stage driving pipeline for one design.
///
/// Stage 1 runs the predictor on the (perturbed) scenario and exposes the
/// chosen uncertainty heuristic; stage 2 plans under the design. The cost
/// scores the emitted plan against the scenario's ground-truth agent future.
pub fn driving_pipeline(
    design: CostDesign,
    sigma_choice: SigmaChoice,
    source: PredictionSource,
    eval_cost: EvalCost,
    params: EpisodeParams,
    seed: u64,
) -> SystemPipeline<DrivingScenario, f64> {
    let name = match source {
        PredictionSource::Model => design_label(design, sigma_choice),
        PredictionSource::GroundTruth => format!("gt-{}", design.name()),
    };
    let predict_params = params.clone();
    let plan_params = params.clone();
    let cost_params = params.clone();

    SystemPipeline::new(
        name,
        |scenario: &DrivingScenario, eps: &[f64]| {
            let eps = PerturbationVector::clamped(eps[0], eps[1]);
            perturb_input(scenario, eps)
        },
        move |signal: &Signal<f64>| match signal
            .value_ref::<(DrivingScenario, PlannedTrajectory)>()
        {
            Ok((scenario, trajectory)) => {
                evaluate_plan(trajectory, scenario, eval_cost, &cost_params)
            }
            Err(_) => f64::NAN,
        },
    )
    .stage(move |signal| {
        let (scenario, _) = signal.take::<DrivingScenario>()?;
        let (agent_prediction, sigma1) = match source {
            PredictionSource::Model => {
                let prediction = predict(&scenario, predict_params.k_modes, seed);
                let sigma = match sigma_choice {
                    SigmaChoice::Ml => prediction.sigma_ml,
                    SigmaChoice::K => prediction.sigma_k,
                };
                (prediction.point_prediction().to_vec(), sigma)
            }
            PredictionSource::GroundTruth => (scenario.agent_future_positions(), 0.0),
        };
        Ok(Signal::new((scenario, agent_prediction), sigma1))
    })
    .stage(move |signal| {
        let (stage_input, sigma1) = signal.take::<(DrivingScenario, Vec<[f64; 2]>)>()?;
        let (scenario, agent_prediction) = stage_input;
        let (trajectory, _) = plan(
            &scenario,
            &agent_prediction,
            sigma1,
            design,
            plan_params.alpha_scale,
            &plan_params.planner,
            seed,
        )
        .map_err(|e| e.to_string())?;
        Ok(Signal::new((scenario, trajectory), sigma1))
    })
}

/// Reference cost: the ground-truth-prediction baseline at zero perturbation.
pub fn gt_reference_cost(
    scenarios: &ScenarioSet<DrivingScenario>,
    eval_cost: EvalCost,
    params: &EpisodeParams,
    seed: u64,
) -> f64 {
    let pipeline = driving_pipeline(
        CostDesign::Baseline,
        SigmaChoice::Ml,
        PredictionSource::GroundTruth,
        eval_cost,
        params.clone(),
        seed,
    );
    expected_cost(&pipeline, scenarios, &[0.0, 0.0]).mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::evaluate_episode_with_source;
    use crate::scenario::{generate_scenarios, ScenarioGenParams};

    #[test]
    fn pipeline_cost_matches_direct_episode_evaluation() {
        let set = generate_scenarios(4, 33, &ScenarioGenParams::default());
        let params = EpisodeParams::default();
        let pipeline = driving_pipeline(
            CostDesign::Avoid,
            SigmaChoice::K,
            PredictionSource::Model,
            EvalCost::Holistic,
            params.clone(),
            12,
        );
        for scenario in &set.scenarios {
            let via_pipeline = pipeline.evaluate(scenario, &[0.0, 0.0]).unwrap();
            let direct = evaluate_episode_with_source(
                scenario,
                CostDesign::Avoid,
                SigmaChoice::K,
                PredictionSource::Model,
                EvalCost::Holistic,
                &params,
                12,
            )
            .unwrap();
            assert_eq!(via_pipeline, direct);
        }
    }

    #[test]
    fn expected_cost_over_suite_is_finite_and_perturbation_sensitive() {
        let set = generate_scenarios(6, 71, &ScenarioGenParams::default());
        let pipeline = driving_pipeline(
            CostDesign::Baseline,
            SigmaChoice::Ml,
            PredictionSource::Model,
            EvalCost::Holistic,
            EpisodeParams::default(),
            7,
        );
        let calm = expected_cost(&pipeline, &set, &[0.0, 0.0]).mean;
        let stressed = expected_cost(&pipeline, &set, &[4.5, 2.8]).mean;
        assert!(calm.is_finite() && stressed.is_finite());
        assert_ne!(calm, stressed);
    }

    #[test]
    fn gt_reference_is_finite_and_below_typical_model_cost() {
        let set = generate_scenarios(6, 71, &ScenarioGenParams::default());
        let params = EpisodeParams::default();
        let reference = gt_reference_cost(&set, EvalCost::Holistic, &params, 7);
        assert!(reference.is_finite());
    }

    #[test]
    fn design_labels_are_stable() {
        assert_eq!(design_label(CostDesign::Baseline, SigmaChoice::Ml), "baseline");
        assert_eq!(design_label(CostDesign::Avoid, SigmaChoice::Ml), "avoid-ml");
        assert_eq!(design_label(CostDesign::Lane, SigmaChoice::K), "lane-k");
    }
}
