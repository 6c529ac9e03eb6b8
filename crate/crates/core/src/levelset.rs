//! Active sub-level-set estimation over a gridded perturbation space.
//!
//! The estimator fits a GP to sampled costs and classifies every grid point
//! as confidently below the threshold or not: a point `g` is a member when
//! `Φ((c − μ(g)) / σ(g)) ≥ 1 − δ`, evaluated as `μ(g) + z·σ(g) ≤ c` with
//! `z = Φ⁻¹(1 − δ)`. Acquisition maximizes the number of newly classified
//! member points under an optimistic hypothetical observation `μ − β·σ`
//! (maximum improvement in level-set estimation).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gp::{GaussianProcess, GpError, KernelHyperParams};
use crate::scalar::{mean, population_variance, standard_normal_quantile, Real};

/// Grid sizes up to this many points keep dense pairwise caches
/// (two `G × G` matrices) for the acquisition loop.
const DENSE_PAIR_LIMIT: usize = 3000;

#[derive(Debug, Error)]
pub enum LevelSetError {
    #[error("invalid perturbation space: {0}")]
    InvalidSpace(String),
    #[error("invalid estimation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error("no usable samples: all {excluded} initial oracle evaluations were non-finite")]
    NoUsableSamples { excluded: usize },
}

/// One named, bounded perturbation dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimRange<S> {
    pub name: String,
    pub lower: S,
    pub upper: S,
}

/// Bounded box of perturbations with a uniform grid per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpace<S> {
    pub dims: Vec<DimRange<S>>,
    pub grid_points_per_dim: usize,
}

impl<S: Real> PerturbationSpace<S> {
    pub fn new(dims: Vec<DimRange<S>>, grid_points_per_dim: usize) -> Result<Self, LevelSetError> {
        let space = Self {
            dims,
            grid_points_per_dim,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<(), LevelSetError> {
        if self.dims.is_empty() {
            return Err(LevelSetError::InvalidSpace("no dimensions".into()));
        }
        for d in &self.dims {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(LevelSetError::InvalidSpace(format!(
                    "dimension '{}' requires finite lower < upper, got [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
        }
        if self.grid_points_per_dim == 0 {
            return Err(LevelSetError::InvalidSpace(
                "grid_points_per_dim must be positive".into(),
            ));
        }
        self.checked_grid_len().ok_or_else(|| {
            LevelSetError::InvalidSpace(format!(
                "grid of {}^{} points overflows",
                self.grid_points_per_dim,
                self.dims.len()
            ))
        })?;
        Ok(())
    }

    pub fn num_dims(&self) -> usize {
        self.dims.len()
    }

    fn checked_grid_len(&self) -> Option<usize> {
        let mut total: usize = 1;
        for _ in 0..self.dims.len() {
            total = total.checked_mul(self.grid_points_per_dim)?;
        }
        Some(total)
    }

    /// Total number of grid points.
    pub fn grid_len(&self) -> usize {
        self.checked_grid_len().expect("validated space")
    }

    /// Grid coordinate along one dimension. Endpoints are included; a
    /// single-point grid sits at the interval midpoint.
    pub fn coord(&self, dim: usize, step: usize) -> S {
        let d = &self.dims[dim];
        let n = self.grid_points_per_dim;
        if n == 1 {
            return (d.lower + d.upper) / S::from_f64_lossy(2.0);
        }
        let t = S::from_usize(step).unwrap() / S::from_usize(n - 1).unwrap();
        d.lower + (d.upper - d.lower) * t
    }

    /// Grid point for a flat index; the first dimension varies slowest.
    pub fn grid_point(&self, index: usize) -> Vec<S> {
        let n = self.grid_points_per_dim;
        let dims = self.dims.len();
        let mut point = vec![S::zero(); dims];
        let mut rest = index;
        for d in (0..dims).rev() {
            point[d] = self.coord(d, rest % n);
            rest /= n;
        }
        debug_assert_eq!(rest, 0);
        point
    }

    /// All grid points in index order.
    pub fn grid_points(&self) -> Vec<Vec<S>> {
        (0..self.grid_len()).map(|i| self.grid_point(i)).collect()
    }

    pub fn contains(&self, point: &[S]) -> bool {
        point.len() == self.dims.len()
            && self
                .dims
                .iter()
                .zip(point)
                .all(|(d, &x)| x >= d.lower && x <= d.upper)
    }

    /// Default lengthscales: 0.2 × range per dimension.
    pub fn default_lengthscales(&self) -> Vec<S> {
        self.dims
            .iter()
            .map(|d| (d.upper - d.lower) * S::from_f64_lossy(0.2))
            .collect()
    }
}

/// Membership rule shared by classification and acquisition.
///
/// `z = Φ⁻¹(1 − δ)`; degenerate σ = 0 falls back to a strict mean comparison.
fn is_member<S: Real>(mu: S, var: S, c: S, z: S) -> bool {
    let var = var.max(S::zero());
    if var == S::zero() {
        mu < c
    } else {
        mu + z * var.sqrt() <= c
    }
}

/// Classifies every grid point under the model's posterior.
///
/// `delta` must lie in (0, 1).
pub fn classify_grid<S: Real>(
    model: &GaussianProcess<S>,
    space: &PerturbationSpace<S>,
    c: S,
    delta: S,
) -> Vec<bool> {
    assert!(
        delta > S::zero() && delta < S::one(),
        "delta must lie in (0, 1)"
    );
    let z = standard_normal_quantile(S::one() - delta);
    (0..space.grid_len())
        .map(|i| {
            let (mu, var) = model.posterior(&space.grid_point(i));
            is_member(mu, var, c, z)
        })
        .collect()
}

/// Counts the grid points a hypothetical observation at one candidate would
/// newly classify as members.
///
/// `pair(g)` yields `(k(candidate, g), v_candᵀ v_g)` for grid point `g`.
#[allow(clippy::too_many_arguments)]
fn candidate_gain<S: Real>(
    mu: &[S],
    var: &[S],
    mu_cand: S,
    var_cand: S,
    hyper_signal: S,
    noise: S,
    beta: S,
    c: S,
    z: S,
    current_count: u64,
    mut pair: impl FnMut(usize) -> (S, S),
) -> u64 {
    let var_cand = var_cand.max(S::zero());
    let denom = var_cand + noise;
    // A candidate the model already knows exactly carries no information.
    if !(denom > hyper_signal * S::epsilon()) {
        return 0;
    }
    let shift = -(beta * var_cand.sqrt());
    let _ = mu_cand; // the optimistic value is μ + shift; only the shift matters
    let mut count = 0u64;
    for g in 0..mu.len() {
        let (k_prior, v_dot) = pair(g);
        let k_post = k_prior - v_dot;
        let mu_new = mu[g] + k_post * shift / denom;
        let var_new = var[g] - k_post * k_post / denom;
        if is_member(mu_new, var_new, c, z) {
            count += 1;
        }
    }
    count.saturating_sub(current_count)
}

/// MILE acquisition: picks the candidate whose optimistic hypothetical
/// observation (`μ − β·σ`) most increases the classified-member count over
/// the space's grid. Ties break to the lowest candidate index.
pub fn mile_acquisition<S: Real>(
    model: &GaussianProcess<S>,
    candidates: &[Vec<S>],
    space: &PerturbationSpace<S>,
    c: S,
    delta: S,
    beta: S,
) -> (Vec<S>, S) {
    assert!(!candidates.is_empty(), "candidate set must be nonempty");
    assert!(
        delta > S::zero() && delta < S::one(),
        "delta must lie in (0, 1)"
    );
    let z = standard_normal_quantile(S::one() - delta);
    let grid = space.grid_points();
    let n = model.len();

    // Per-grid-point posterior pieces: v-columns, mean, raw variance.
    let mut v_cols: Vec<Vec<S>> = Vec::with_capacity(grid.len());
    let mut mu = Vec::with_capacity(grid.len());
    let mut var = Vec::with_capacity(grid.len());
    for g in &grid {
        let k_vec: Vec<S> = model
            .train_inputs()
            .iter()
            .map(|p| model.hyper().kernel(p, g))
            .collect();
        let v = model.forward_solve_slice(&k_vec);
        let mut m = S::zero();
        let mut s2 = model.hyper().signal_variance;
        for i in 0..n {
            m += v[i] * model.half_solve()[i];
            s2 -= v[i] * v[i];
        }
        v_cols.push(v);
        mu.push(m);
        var.push(s2);
    }
    let current_count = mu
        .iter()
        .zip(&var)
        .filter(|&(&m, &s2)| is_member(m, s2, c, z))
        .count() as u64;

    let noise = model.hyper().noise_variance;
    let signal = model.hyper().signal_variance;
    let gains: Vec<u64> = candidates
        .par_iter()
        .map(|cand| {
            let k_vec: Vec<S> = model
                .train_inputs()
                .iter()
                .map(|p| model.hyper().kernel(p, cand))
                .collect();
            let v_cand = model.forward_solve_slice(&k_vec);
            let mut m = S::zero();
            let mut s2 = signal;
            for i in 0..n {
                m += v_cand[i] * model.half_solve()[i];
                s2 -= v_cand[i] * v_cand[i];
            }
            candidate_gain(
                &mu,
                &var,
                m,
                s2,
                signal,
                noise,
                beta,
                c,
                z,
                current_count,
                |g| {
                    let mut dot = S::zero();
                    for i in 0..n {
                        dot += v_cand[i] * v_cols[g][i];
                    }
                    (model.hyper().kernel(cand, &grid[g]), dot)
                },
            )
        })
        .collect();

    let mut best = 0usize;
    for (j, &gain) in gains.iter().enumerate() {
        if gain > gains[best] {
            best = j;
        }
    }
    (
        candidates[best].clone(),
        S::from_u64(gains[best]).unwrap(),
    )
}

/// How the sample budget beyond the initial design is spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingStrategy {
    /// Active acquisition over the grid.
    Mile,
    /// Uniform random points; the baseline the active strategy is judged
    /// against.
    UniformRandom,
}

/// Parameters for [`estimate_sublevel_set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig<S> {
    pub confidence_delta: S,
    pub n_init: usize,
    pub budget: usize,
    pub seed: u64,
    pub optimism_beta: S,
    /// Fixed hyperparameters; `None` derives them from the initial samples.
    pub hyper: Option<KernelHyperParams<S>>,
    pub strategy: SamplingStrategy,
}

impl<S: Real> Default for EstimationConfig<S> {
    fn default() -> Self {
        Self {
            confidence_delta: S::from_f64_lossy(0.05),
            n_init: 10,
            budget: 60,
            seed: 0,
            optimism_beta: S::from_f64_lossy(1.96),
            hyper: None,
            strategy: SamplingStrategy::Mile,
        }
    }
}

impl<S: Real> EstimationConfig<S> {
    pub fn validate(&self) -> Result<(), LevelSetError> {
        if !(self.confidence_delta > S::zero() && self.confidence_delta < S::one()) {
            return Err(LevelSetError::InvalidConfig(format!(
                "confidence_delta = {} must lie in (0, 1)",
                self.confidence_delta
            )));
        }
        if self.n_init < 2 {
            return Err(LevelSetError::InvalidConfig(
                "n_init must be at least 2".into(),
            ));
        }
        if self.budget < self.n_init {
            return Err(LevelSetError::InvalidConfig(format!(
                "budget {} is below n_init {}",
                self.budget, self.n_init
            )));
        }
        if !(self.optimism_beta.is_finite() && self.optimism_beta >= S::zero()) {
            return Err(LevelSetError::InvalidConfig(
                "optimism_beta must be nonnegative".into(),
            ));
        }
        if let Some(h) = &self.hyper {
            h.validate()?;
        }
        Ok(())
    }
}

/// A sample fed to the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<S> {
    pub point: Vec<S>,
    pub cost: S,
}

/// A sample whose oracle evaluation came back non-finite and was excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedSample<S> {
    pub point: Vec<S>,
    pub reason: String,
}

/// The robustness measurement: grid membership of the estimated sub-level
/// set, its size as a fraction of the grid, and everything needed to audit
/// it (samples and the final posterior model).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubLevelSetEstimate<S> {
    pub space: PerturbationSpace<S>,
    pub threshold_c: S,
    pub confidence_delta: S,
    pub membership: Vec<bool>,
    pub size_fraction: S,
    pub samples_used: Vec<Sample<S>>,
    pub excluded_samples: Vec<ExcludedSample<S>>,
    pub model: GaussianProcess<S>,
}

impl<S: Real> SubLevelSetEstimate<S> {
    pub fn member_count(&self) -> usize {
        self.membership.iter().filter(|&&m| m).count()
    }
}

/// Latin-hypercube design: one stratum per sample and dimension, shuffled.
fn latin_hypercube<S: Real>(
    space: &PerturbationSpace<S>,
    n: usize,
    rng: &mut ChaCha20Rng,
) -> Vec<Vec<S>> {
    let dims = space.num_dims();
    let mut points = vec![vec![S::zero(); dims]; n];
    for (d, dim) in space.dims.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        let width = (dim.upper - dim.lower) / S::from_usize(n).unwrap();
        for (i, point) in points.iter_mut().enumerate() {
            let offset = S::from_f64_lossy(rng.random::<f64>());
            point[d] = dim.lower + width * (S::from_usize(strata[i]).unwrap() + offset);
        }
    }
    points
}

fn uniform_point<S: Real>(space: &PerturbationSpace<S>, rng: &mut ChaCha20Rng) -> Vec<S> {
    space
        .dims
        .iter()
        .map(|d| d.lower + (d.upper - d.lower) * S::from_f64_lossy(rng.random::<f64>()))
        .collect()
}

/// Hyperparameter defaults: lengthscale 0.2 × range, signal variance from the
/// empirical variance of the initial targets (falling back to the mean square
/// when the targets are constant), noise 1e-4 × signal variance.
fn default_hyper<S: Real>(space: &PerturbationSpace<S>, targets: &[S]) -> KernelHyperParams<S> {
    let var = population_variance(targets);
    let mean_sq = mean(&targets.iter().map(|&y| y * y).collect::<Vec<_>>());
    let floor = S::from_f64_lossy(1e-12);
    let signal = if var > mean_sq.max(S::one()) * floor {
        var
    } else {
        mean_sq.max(floor)
    };
    KernelHyperParams {
        lengthscales: space.default_lengthscales(),
        signal_variance: signal,
        noise_variance: signal * S::from_f64_lossy(1e-4),
    }
}

/// Folds training row `i` of `gp` into the per-grid-point posterior state.
///
/// The arithmetic matches `GaussianProcess::posterior` term for term, so the
/// accumulated `mu`/`var` stay bitwise-consistent with a fresh query.
#[allow(clippy::too_many_arguments)]
fn absorb_row<S: Real>(
    gp: &GaussianProcess<S>,
    i: usize,
    grid: &[Vec<S>],
    grid_idx: Option<usize>,
    kgg: Option<&[S]>,
    v_cols: &mut [Vec<S>],
    mu: &mut [S],
    var: &mut [S],
    pmat: Option<&mut Vec<S>>,
) {
    let g_len = grid.len();
    let row_l = gp.chol_row(i);
    let pivot = row_l[i];
    let w_i = gp.half_solve()[i];
    let x_i = &gp.train_inputs()[i];

    let mut new_row = vec![S::zero(); g_len];
    for g in 0..g_len {
        let mut acc = match (kgg, grid_idx) {
            (Some(kgg), Some(j)) => kgg[j * g_len + g],
            _ => gp.hyper().kernel(x_i, &grid[g]),
        };
        let col = &v_cols[g];
        for (j, &l) in row_l[..i].iter().enumerate() {
            acc -= l * col[j];
        }
        let v = acc / pivot;
        new_row[g] = v;
        mu[g] += v * w_i;
        var[g] -= v * v;
    }
    for (g, col) in v_cols.iter_mut().enumerate() {
        col.push(new_row[g]);
    }
    if let Some(p) = pmat {
        p.par_chunks_mut(g_len).enumerate().for_each(|(j, row)| {
            let vj = new_row[j];
            for (g, slot) in row.iter_mut().enumerate() {
                *slot += vj * new_row[g];
            }
        });
    }
}

/// Incremental state for the acquisition loop: posterior pieces for every
/// grid point, plus dense pairwise caches on small grids (prior kernel matrix
/// and `P[j, g] = v_jᵀ v_g`, updated rank-1 per added sample).
struct GridEngine<'a, S> {
    gp: GaussianProcess<S>,
    grid: &'a [Vec<S>],
    /// `v_cols[g][i] = (L⁻¹ k(X, g))_i`.
    v_cols: Vec<Vec<S>>,
    mu: Vec<S>,
    var: Vec<S>,
    kgg: Option<Vec<S>>,
    pmat: Option<Vec<S>>,
}

impl<'a, S: Real> GridEngine<'a, S> {
    fn new(gp: GaussianProcess<S>, grid: &'a [Vec<S>]) -> Self {
        let g_len = grid.len();
        let dense = g_len <= DENSE_PAIR_LIMIT;
        let kgg = dense.then(|| {
            let mut m = vec![S::zero(); g_len * g_len];
            for j in 0..g_len {
                for g in j..g_len {
                    let k = gp.hyper().kernel(&grid[j], &grid[g]);
                    m[j * g_len + g] = k;
                    m[g * g_len + j] = k;
                }
            }
            m
        });
        let mut v_cols = vec![Vec::new(); g_len];
        let mut mu = vec![S::zero(); g_len];
        let mut var = vec![gp.hyper().signal_variance; g_len];
        let mut pmat = dense.then(|| vec![S::zero(); g_len * g_len]);
        for i in 0..gp.len() {
            absorb_row(
                &gp,
                i,
                grid,
                None,
                kgg.as_deref(),
                &mut v_cols,
                &mut mu,
                &mut var,
                pmat.as_mut(),
            );
        }
        Self {
            gp,
            grid,
            v_cols,
            mu,
            var,
            kgg,
            pmat,
        }
    }

    fn add_sample(&mut self, grid_idx: usize, target: S) -> Result<(), GpError> {
        let gp = self
            .gp
            .with_observation(self.grid[grid_idx].clone(), target)?;
        absorb_row(
            &gp,
            gp.len() - 1,
            self.grid,
            Some(grid_idx),
            self.kgg.as_deref(),
            &mut self.v_cols,
            &mut self.mu,
            &mut self.var,
            self.pmat.as_mut(),
        );
        self.gp = gp;
        Ok(())
    }

    fn member_count(&self, c: S, z: S) -> u64 {
        self.mu
            .iter()
            .zip(&self.var)
            .filter(|&(&m, &v)| is_member(m, v, c, z))
            .count() as u64
    }

    /// One MILE round over all grid points as candidates.
    fn select(&self, c: S, z: S, beta: S) -> (usize, u64) {
        let g_len = self.grid.len();
        let noise = self.gp.hyper().noise_variance;
        let signal = self.gp.hyper().signal_variance;
        let current = self.member_count(c, z);
        let gains: Vec<u64> = (0..g_len)
            .into_par_iter()
            .map(|j| {
                let pair_dense = self.kgg.as_ref().zip(self.pmat.as_ref());
                let v_j = &self.v_cols[j];
                candidate_gain(
                    &self.mu,
                    &self.var,
                    self.mu[j],
                    self.var[j],
                    signal,
                    noise,
                    beta,
                    c,
                    z,
                    current,
                    |g| match pair_dense {
                        Some((kgg, p)) => (kgg[j * g_len + g], p[j * g_len + g]),
                        None => {
                            let mut dot = S::zero();
                            let col = &self.v_cols[g];
                            for i in 0..v_j.len() {
                                dot += v_j[i] * col[i];
                            }
                            (self.gp.hyper().kernel(&self.grid[j], &self.grid[g]), dot)
                        }
                    },
                )
            })
            .collect();
        let mut best = 0usize;
        for (j, &gain) in gains.iter().enumerate() {
            if gain > gains[best] {
                best = j;
            }
        }
        (best, gains[best])
    }

    fn into_membership(self, c: S, z: S) -> (Vec<bool>, GaussianProcess<S>) {
        let mask = self
            .mu
            .iter()
            .zip(&self.var)
            .map(|(&m, &v)| is_member(m, v, c, z))
            .collect();
        (mask, self.gp)
    }
}

/// Estimates the sub-level set `{ε : oracle(ε) < c}` over the space's grid.
///
/// Draws `n_init` Latin-hypercube samples, spends the remaining budget per
/// the configured strategy, and classifies the grid under the final
/// posterior. Non-finite oracle values are excluded from the fit and
/// reported. Deterministic given the seed.
pub fn estimate_sublevel_set<S: Real>(
    mut oracle: impl FnMut(&[S]) -> S,
    space: &PerturbationSpace<S>,
    c: S,
    config: &EstimationConfig<S>,
) -> Result<SubLevelSetEstimate<S>, LevelSetError> {
    space.validate()?;
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let z = standard_normal_quantile(S::one() - config.confidence_delta);

    let mut samples_used: Vec<Sample<S>> = Vec::new();
    let mut excluded: Vec<ExcludedSample<S>> = Vec::new();
    let record = |point: Vec<S>,
                  cost: S,
                  used: &mut Vec<Sample<S>>,
                  excluded: &mut Vec<ExcludedSample<S>>| {
        if cost.is_finite() {
            used.push(Sample { point, cost });
            true
        } else {
            excluded.push(ExcludedSample {
                point,
                reason: format!("oracle returned {cost}"),
            });
            false
        }
    };

    for point in latin_hypercube(space, config.n_init, &mut rng) {
        let cost = oracle(&point);
        record(point, cost, &mut samples_used, &mut excluded);
    }
    if samples_used.is_empty() {
        return Err(LevelSetError::NoUsableSamples {
            excluded: excluded.len(),
        });
    }

    let initial_targets: Vec<S> = samples_used.iter().map(|s| s.cost).collect();
    let hyper = config
        .hyper
        .clone()
        .unwrap_or_else(|| default_hyper(space, &initial_targets));

    let remaining = config.budget - config.n_init;
    let (membership, model) = match config.strategy {
        SamplingStrategy::Mile => {
            let grid = space.grid_points();
            let gp = GaussianProcess::fit(
                samples_used.iter().map(|s| s.point.clone()).collect(),
                initial_targets,
                hyper,
            )?;
            let mut engine = GridEngine::new(gp, &grid);
            for _ in 0..remaining {
                let (best, _gain) = engine.select(c, z, config.optimism_beta);
                let cost = oracle(&grid[best]);
                if record(grid[best].clone(), cost, &mut samples_used, &mut excluded) {
                    engine.add_sample(best, cost)?;
                }
            }
            engine.into_membership(c, z)
        }
        SamplingStrategy::UniformRandom => {
            for _ in 0..remaining {
                let point = uniform_point(space, &mut rng);
                let cost = oracle(&point);
                record(point, cost, &mut samples_used, &mut excluded);
            }
            let gp = GaussianProcess::fit(
                samples_used.iter().map(|s| s.point.clone()).collect(),
                samples_used.iter().map(|s| s.cost).collect(),
                hyper,
            )?;
            let mask = classify_grid(&gp, space, c, config.confidence_delta);
            (mask, gp)
        }
    };

    let member_count = membership.iter().filter(|&&m| m).count();
    let size_fraction =
        S::from_usize(member_count).unwrap() / S::from_usize(space.grid_len()).unwrap();
    Ok(SubLevelSetEstimate {
        space: space.clone(),
        threshold_c: c,
        confidence_delta: config.confidence_delta,
        membership,
        size_fraction,
        samples_used,
        excluded_samples: excluded,
        model,
    })
}
