//! Pipelines as perturbation → expected-cost oracles.
//!
//! A [`SystemPipeline`] is a black-box composition of stages, each mapping a
//! value/uncertainty pair to the next; the final output is the control the
//! cost function scores. [`expected_cost`] averages the cost over a scenario
//! set with the perturbation injected into every scenario, [`analyze`] turns
//! that oracle into a sub-level-set robustness report, and [`compare`] lines
//! reports up for design selection.

use std::any::Any;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levelset::{
    estimate_sublevel_set, EstimationConfig, LevelSetError, PerturbationSpace, SubLevelSetEstimate,
};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error(transparent)]
    Estimation(#[from] LevelSetError),
    #[error("need at least two reports to compare, got {0}")]
    NotEnoughReports(usize),
    #[error("reports are not comparable: {0}")]
    Mismatch(String),
}

/// A value flowing between stages together with its uncertainty measure.
pub struct Signal<S> {
    value: Box<dyn Any + Send + Sync>,
    pub sigma: S,
}

impl<S: Real> Signal<S> {
    pub fn new<T: Any + Send + Sync>(value: T, sigma: S) -> Self {
        Self {
            value: Box::new(value),
            sigma,
        }
    }

    /// Consumes the signal, downcasting its value.
    pub fn take<T: Any>(self) -> Result<(T, S), String> {
        let sigma = self.sigma;
        match self.value.downcast::<T>() {
            Ok(v) => Ok((*v, sigma)),
            Err(_) => Err(format!(
                "stage received unexpected value type (wanted {})",
                std::any::type_name::<T>()
            )),
        }
    }

    pub fn value_ref<T: Any>(&self) -> Result<&T, String> {
        self.value.downcast_ref::<T>().ok_or_else(|| {
            format!(
                "cost received unexpected value type (wanted {})",
                std::any::type_name::<T>()
            )
        })
    }
}

type StageFn<S> = Box<dyn Fn(Signal<S>) -> Result<Signal<S>, String> + Send + Sync>;
type CostFn<S> = Box<dyn Fn(&Signal<S>) -> S + Send + Sync>;
type InjectFn<X, S> = Box<dyn Fn(&X, &[S]) -> X + Send + Sync>;

/// A named composition of deterministic stages with a perturbation-injection
/// hook and a scalar cost on the final output.
pub struct SystemPipeline<X, S> {
    name: String,
    inject: InjectFn<X, S>,
    stages: Vec<StageFn<S>>,
    cost: CostFn<S>,
}

impl<X, S> SystemPipeline<X, S>
where
    X: Any + Send + Sync + Clone,
    S: Real,
{
    pub fn new(
        name: impl Into<String>,
        inject: impl Fn(&X, &[S]) -> X + Send + Sync + 'static,
        cost: impl Fn(&Signal<S>) -> S + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            inject: Box::new(inject),
            stages: Vec::new(),
            cost: Box::new(cost),
        }
    }

    /// Appends a stage; stages run in insertion order.
    pub fn stage(
        mut self,
        f: impl Fn(Signal<S>) -> Result<Signal<S>, String> + Send + Sync + 'static,
    ) -> Self {
        self.stages.push(Box::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Runs the stages on one perturbed scenario and scores the output.
    pub fn evaluate(&self, scenario: &X, perturbation: &[S]) -> Result<S, StageFailure> {
        let perturbed = (self.inject)(scenario, perturbation);
        let mut signal = Signal::new(perturbed, S::zero());
        for (index, stage) in self.stages.iter().enumerate() {
            signal = stage(signal).map_err(|message| StageFailure {
                stage_index: index,
                message,
            })?;
        }
        Ok((self.cost)(&signal))
    }
}

/// Why one scenario failed to produce a finite cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage_index: usize,
    pub message: String,
}

/// Nominal inputs drawn from the input distribution, with the seed that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet<X> {
    pub scenarios: Vec<X>,
    pub seed: u64,
}

impl<X> ScenarioSet<X> {
    pub fn new(scenarios: Vec<X>, seed: u64) -> Self {
        assert!(!scenarios.is_empty(), "scenario set must be nonempty");
        Self { scenarios, seed }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }
}

/// Expected cost of one perturbation over a scenario set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCost<S> {
    /// Mean cost; non-finite when any scenario failed.
    pub mean: S,
    pub scenario_costs: Vec<S>,
    /// `(scenario index, failure)` pairs for scenarios without finite cost.
    pub failures: Vec<(usize, StageFailure)>,
}

/// Mean cost over all scenarios with the perturbation injected into each.
///
/// Scenario evaluations run concurrently; the mean sums sorted values so it
/// is exactly permutation-invariant in the scenario list. Any failed or
/// non-finite scenario makes the mean NaN and is listed in the diagnostics.
pub fn expected_cost<X, S>(
    pipeline: &SystemPipeline<X, S>,
    scenarios: &ScenarioSet<X>,
    perturbation: &[S],
) -> ExpectedCost<S>
where
    X: Any + Send + Sync + Clone,
    S: Real,
{
    let outcomes: Vec<Result<S, StageFailure>> = scenarios
        .scenarios
        .par_iter()
        .map(|x| pipeline.evaluate(x, perturbation))
        .collect();

    let mut scenario_costs = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(cost) if cost.is_finite() => scenario_costs.push(cost),
            Ok(cost) => {
                scenario_costs.push(cost);
                failures.push((
                    index,
                    StageFailure {
                        stage_index: pipeline.stages.len(),
                        message: format!("cost evaluated to {cost}"),
                    },
                ));
            }
            Err(failure) => {
                scenario_costs.push(S::nan());
                failures.push((index, failure));
            }
        }
    }

    let mean = if failures.is_empty() {
        let mut sorted = scenario_costs.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite costs"));
        sorted.iter().copied().sum::<S>() / S::from_usize(sorted.len()).unwrap()
    } else {
        S::nan()
    };
    ExpectedCost {
        mean,
        scenario_costs,
        failures,
    }
}

/// Estimation parameters plus the performance reference used for relative
/// costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeParams<S> {
    pub estimation: EstimationConfig<S>,
    pub baseline_cost_reference: S,
}

/// Robustness measurement of one design: its sub-level set over the
/// perturbation space plus its unperturbed cost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessReport<S> {
    pub design_name: String,
    pub cost_at_zero_perturbation: S,
    pub sublevel_size: S,
    pub estimate: SubLevelSetEstimate<S>,
    pub baseline_cost_reference: S,
}

/// Runs sub-level-set estimation on the pipeline's expected-cost oracle and
/// evaluates the cost at zero perturbation. Deterministic given the seeds.
pub fn analyze<X, S>(
    pipeline: &SystemPipeline<X, S>,
    scenarios: &ScenarioSet<X>,
    space: &PerturbationSpace<S>,
    c: S,
    params: &AnalyzeParams<S>,
) -> Result<RobustnessReport<S>, RobustnessError>
where
    X: Any + Send + Sync + Clone,
    S: Real,
{
    let estimate = estimate_sublevel_set(
        |eps| expected_cost(pipeline, scenarios, eps).mean,
        space,
        c,
        &params.estimation,
    )?;
    let zero = vec![S::zero(); space.num_dims()];
    let cost_at_zero = expected_cost(pipeline, scenarios, &zero).mean;
    Ok(RobustnessReport {
        design_name: pipeline.name().to_string(),
        cost_at_zero_perturbation: cost_at_zero,
        sublevel_size: estimate.size_fraction,
        estimate,
        baseline_cost_reference: params.baseline_cost_reference,
    })
}

/// One comparison row in the format of the design-selection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow<S> {
    pub design: String,
    pub sublevel_size: S,
    /// Unperturbed cost minus the shared reference cost.
    pub relative_cost: S,
    pub max_size: bool,
    pub min_cost: bool,
}

/// Design-comparison table, rows sorted by design name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable<S> {
    pub threshold_c: S,
    pub rows: Vec<ComparisonRow<S>>,
}

/// Lines up robustness reports that share a space and threshold, flagging
/// the largest sub-level set and the lowest relative cost (ties all flagged).
pub fn compare<S: Real>(
    reports: &[RobustnessReport<S>],
) -> Result<ComparisonTable<S>, RobustnessError> {
    if reports.len() < 2 {
        return Err(RobustnessError::NotEnoughReports(reports.len()));
    }
    let first = &reports[0];
    for r in &reports[1..] {
        if r.estimate.space != first.estimate.space {
            return Err(RobustnessError::Mismatch(format!(
                "'{}' and '{}' use different perturbation spaces",
                first.design_name, r.design_name
            )));
        }
        if r.estimate.threshold_c != first.estimate.threshold_c {
            return Err(RobustnessError::Mismatch(format!(
                "'{}' and '{}' use different thresholds",
                first.design_name, r.design_name
            )));
        }
    }

    let mut rows: Vec<ComparisonRow<S>> = reports
        .iter()
        .map(|r| ComparisonRow {
            design: r.design_name.clone(),
            sublevel_size: r.sublevel_size,
            relative_cost: r.cost_at_zero_perturbation - r.baseline_cost_reference,
            max_size: false,
            min_cost: false,
        })
        .collect();
    rows.sort_by(|a, b| a.design.cmp(&b.design));

    let max_size = rows
        .iter()
        .map(|r| r.sublevel_size)
        .fold(S::neg_infinity(), S::max);
    let min_cost = rows
        .iter()
        .map(|r| r.relative_cost)
        .fold(S::infinity(), S::min);
    for row in &mut rows {
        row.max_size = row.sublevel_size == max_size;
        row.min_cost = row.relative_cost == min_cost;
    }
    Ok(ComparisonTable {
        threshold_c: first.estimate.threshold_c,
        rows,
    })
}
