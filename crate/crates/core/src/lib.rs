//! Numeric core for robustness analysis of modular autonomy pipelines.
//!
//! Three pieces fit together here:
//!
//! - [`gp`] / [`levelset`]: Gaussian-process regression and active
//!   sub-level-set estimation of `{ε : expected cost(ε) < c}` over a bounded
//!   grid of input perturbations. The size of that set is the robustness
//!   measurement.
//! - [`calibration`]: detection calibration error (D-ECE), the binned
//!   characterization `P(cost > c | calibration error bin)` of a downstream
//!   decision maker, and checks of probabilistic specifications against it.
//! - [`robustness`]: wraps a staged pipeline as a perturbation → expected
//!   cost oracle and turns estimates into comparable reports.
//!
//! All numeric code is generic over the scalar type ([`scalar::Real`], i.e.
//! `f32` or `f64`); the aliases below pin the `f64` instantiations used by
//! the simulators and the CLI.

pub mod calibration;
pub mod gp;
pub mod levelset;
pub mod robustness;
pub mod scalar;

pub use scalar::Real;

/// `f64` instantiations used throughout the toolkit binaries.
pub type GaussianProcessF64 = gp::GaussianProcess<f64>;
pub type KernelHyperParamsF64 = gp::KernelHyperParams<f64>;
pub type PerturbationSpaceF64 = levelset::PerturbationSpace<f64>;
pub type EstimationConfigF64 = levelset::EstimationConfig<f64>;
pub type SubLevelSetEstimateF64 = levelset::SubLevelSetEstimate<f64>;
pub type CharacterizationF64 = calibration::Characterization<f64>;
pub type SpecResultF64 = calibration::SpecResult<f64>;
pub type RobustnessReportF64 = robustness::RobustnessReport<f64>;
