//! Gaussian-process regression with a squared-exponential kernel.
//!
//! The model keeps the Cholesky factor of `K + noise·I` so posteriors are
//! cheap and so one observation can be appended without refitting from
//! scratch. The bordered-update path performs the same arithmetic as a full
//! refit, row by row, so both routes agree to machine precision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Squared-exponential kernel hyperparameters with one lengthscale per input
/// dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperParams<S> {
    pub lengthscales: Vec<S>,
    pub signal_variance: S,
    pub noise_variance: S,
}

impl<S: Real> KernelHyperParams<S> {
    pub fn new(lengthscales: Vec<S>, signal_variance: S, noise_variance: S) -> Result<Self, GpError> {
        let hyper = Self {
            lengthscales,
            signal_variance,
            noise_variance,
        };
        hyper.validate()?;
        Ok(hyper)
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if self.lengthscales.is_empty() {
            return Err(GpError::InvalidHyper("no lengthscales given".into()));
        }
        for (d, l) in self.lengthscales.iter().enumerate() {
            if !(l.is_finite() && *l > S::zero()) {
                return Err(GpError::InvalidHyper(format!(
                    "lengthscale[{d}] = {l} must be positive and finite"
                )));
            }
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > S::zero()) {
            return Err(GpError::InvalidHyper(format!(
                "signal_variance = {} must be positive and finite",
                self.signal_variance
            )));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= S::zero()) {
            return Err(GpError::InvalidHyper(format!(
                "noise_variance = {} must be nonnegative and finite",
                self.noise_variance
            )));
        }
        Ok(())
    }

    /// Kernel value k(a, b).
    pub fn kernel(&self, a: &[S], b: &[S]) -> S {
        debug_assert_eq!(a.len(), self.lengthscales.len());
        debug_assert_eq!(b.len(), self.lengthscales.len());
        let mut q = S::zero();
        for d in 0..self.lengthscales.len() {
            let r = (a[d] - b[d]) / self.lengthscales[d];
            q += r * r;
        }
        self.signal_variance * (-q / S::from_f64_lossy(2.0)).exp()
    }
}

#[derive(Debug, Error)]
pub enum GpError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training inputs and targets differ in length: {inputs} vs {targets}")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error("point {index} has {got} dims, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite value in training data at point {0}")]
    NonFinite(usize),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),
    #[error(
        "covariance is not positive definite at point {i}; nearest earlier point is {j} \
         (distance {distance:.3e}); duplicate inputs need noise_variance > 0"
    )]
    NotPositiveDefinite { i: usize, j: usize, distance: f64 },
}

/// GP regression model conditioned on a finite training set.
///
/// Stores the lower Cholesky factor `L` of `K + noise·I` and the half-solve
/// `w = L⁻¹ y`; the posterior at a query `x` is `μ = vᵀw`, `σ² = k(x,x) − vᵀv`
/// with `v = L⁻¹ k(X, x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianProcess<S> {
    hyper: KernelHyperParams<S>,
    train_inputs: Vec<Vec<S>>,
    train_targets: Vec<S>,
    /// Row-major dense `n × n` matrix holding `L` in its lower triangle.
    chol_factor: Vec<S>,
    /// `L⁻¹ y`.
    half_solve: Vec<S>,
}

impl<S: Real> GaussianProcess<S> {
    /// Fits a GP to the given points and targets.
    pub fn fit(
        points: Vec<Vec<S>>,
        targets: Vec<S>,
        hyper: KernelHyperParams<S>,
    ) -> Result<Self, GpError> {
        hyper.validate()?;
        if points.is_empty() {
            return Err(GpError::EmptyTrainingSet);
        }
        if points.len() != targets.len() {
            return Err(GpError::LengthMismatch {
                inputs: points.len(),
                targets: targets.len(),
            });
        }
        let dim = hyper.lengthscales.len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(GpError::DimensionMismatch {
                    index: i,
                    got: p.len(),
                    expected: dim,
                });
            }
            if p.iter().any(|c| !c.is_finite()) || !targets[i].is_finite() {
                return Err(GpError::NonFinite(i));
            }
        }

        let mut model = Self {
            hyper,
            train_inputs: Vec::with_capacity(points.len()),
            train_targets: Vec::with_capacity(targets.len()),
            chol_factor: Vec::new(),
            half_solve: Vec::new(),
        };
        for (p, y) in points.into_iter().zip(targets) {
            model.append(p, y)?;
        }
        Ok(model)
    }

    /// Returns a new model conditioned on one extra observation.
    ///
    /// Arithmetically identical to refitting on the extended training set.
    pub fn with_observation(&self, point: Vec<S>, target: S) -> Result<Self, GpError> {
        let mut model = self.clone();
        let dim = model.hyper.lengthscales.len();
        if point.len() != dim {
            return Err(GpError::DimensionMismatch {
                index: model.len(),
                got: point.len(),
                expected: dim,
            });
        }
        if point.iter().any(|c| !c.is_finite()) || !target.is_finite() {
            return Err(GpError::NonFinite(model.len()));
        }
        model.append(point, target)?;
        Ok(model)
    }

    /// Appends one training point via a bordered Cholesky update.
    fn append(&mut self, point: Vec<S>, target: S) -> Result<(), GpError> {
        let n = self.train_inputs.len();
        let mut k_vec = Vec::with_capacity(n);
        for p in &self.train_inputs {
            k_vec.push(self.hyper.kernel(p, &point));
        }
        // New row of L: l = L⁻¹ k, pivot d = sqrt(k(x,x) + ν − lᵀl).
        let l_row = self.forward_solve_slice(&k_vec);
        let mut pivot2 = self.hyper.signal_variance + self.hyper.noise_variance;
        for v in &l_row {
            pivot2 -= *v * *v;
        }
        if !(pivot2 > S::zero()) || !pivot2.is_finite() {
            let (j, distance) = nearest_point(&self.train_inputs, &point);
            return Err(GpError::NotPositiveDefinite { i: n, j, distance });
        }
        let pivot = pivot2.sqrt();

        let size = n + 1;
        let mut chol = vec![S::zero(); size * size];
        for i in 0..n {
            chol[i * size..i * size + size - 1]
                .copy_from_slice(&self.chol_factor[i * n..i * n + n]);
        }
        chol[n * size..n * size + n].copy_from_slice(&l_row);
        chol[n * size + n] = pivot;

        let mut dot = S::zero();
        for (l, w) in l_row.iter().zip(&self.half_solve) {
            dot += *l * *w;
        }
        self.half_solve.push((target - dot) / pivot);
        self.chol_factor = chol;
        self.train_inputs.push(point);
        self.train_targets.push(target);
        Ok(())
    }

    /// Posterior mean and variance at a query point.
    ///
    /// Variance is clamped to zero when rounding drives it slightly negative.
    pub fn posterior(&self, query: &[S]) -> (S, S) {
        assert_eq!(
            query.len(),
            self.hyper.lengthscales.len(),
            "query dimension mismatch"
        );
        let n = self.len();
        let mut k_vec = Vec::with_capacity(n);
        for p in &self.train_inputs {
            k_vec.push(self.hyper.kernel(p, query));
        }
        let v = self.forward_solve_slice(&k_vec);
        let mut mean = S::zero();
        let mut var = self.hyper.signal_variance;
        for i in 0..n {
            mean += v[i] * self.half_solve[i];
            var -= v[i] * v[i];
        }
        (mean, var.max(S::zero()))
    }

    /// Solves `L x = b` against the stored factor.
    pub fn forward_solve_slice(&self, b: &[S]) -> Vec<S> {
        let n = self.train_inputs.len();
        debug_assert_eq!(b.len(), n);
        let stride = n;
        let mut x = vec![S::zero(); n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.chol_factor[i * stride + j] * x[j];
            }
            x[i] = acc / self.chol_factor[i * stride + i];
        }
        x
    }

    pub fn len(&self) -> usize {
        self.train_inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hyper.lengthscales.len()
    }

    pub fn hyper(&self) -> &KernelHyperParams<S> {
        &self.hyper
    }

    pub fn train_inputs(&self) -> &[Vec<S>] {
        &self.train_inputs
    }

    pub fn train_targets(&self) -> &[S] {
        &self.train_targets
    }

    /// Row `i` of the Cholesky factor (first `i + 1` entries are meaningful).
    pub fn chol_row(&self, i: usize) -> &[S] {
        let n = self.len();
        &self.chol_factor[i * n..i * n + i + 1]
    }

    /// `L⁻¹ y`.
    pub fn half_solve(&self) -> &[S] {
        &self.half_solve
    }

    /// Max relative error of `L·Lᵀ` against `K + noise·I`.
    pub fn factorization_residual(&self) -> S {
        let n = self.len();
        let mut worst = S::zero();
        for i in 0..n {
            for j in 0..=i {
                let mut rebuilt = S::zero();
                for k in 0..=j {
                    rebuilt += self.chol_factor[i * n + k] * self.chol_factor[j * n + k];
                }
                let mut expected = self.hyper.kernel(&self.train_inputs[i], &self.train_inputs[j]);
                if i == j {
                    expected += self.hyper.noise_variance;
                }
                let scale = expected.abs().max(S::one());
                worst = worst.max((rebuilt - expected).abs() / scale);
            }
        }
        worst
    }
}

fn nearest_point<S: Real>(points: &[Vec<S>], query: &[S]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, p) in points.iter().enumerate() {
        let d2: S = p
            .iter()
            .zip(query)
            .map(|(a, b)| (*a - *b) * (*a - *b))
            .sum();
        let d = d2.as_f64().sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}
