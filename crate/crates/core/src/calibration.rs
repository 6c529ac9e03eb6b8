//! Calibration errors and specifications on their distributions.
//!
//! [`d_ece`] measures detection calibration error. [`characterize`] bins
//! per-datum calibration errors and estimates `P(cost > c | bin)` — the
//! empirical contract of the downstream decision maker. [`check_spec`]
//! evaluates the probabilistic system specification `P(cost > c) < α` as a
//! weighted sum of those bin probabilities against a candidate distribution
//! over calibration errors, and [`max_feasible_mass`] inverts it for one bin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("detection list is empty")]
    EmptyDetections,
    #[error("n_bins must be at least 1")]
    InvalidBinCount,
    #[error("detection {index} has confidence {value} outside [0, 1]")]
    ConfidenceOutOfRange { index: usize, value: f64 },
    #[error("bin edges must be strictly increasing and at least two")]
    InvalidEdges,
    #[error("record {index} (l = {l_value}) falls outside the bin edges [{lo}, {hi}]")]
    RecordOutsideEdges {
        index: usize,
        l_value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("record {index} is non-finite")]
    NonFiniteRecord { index: usize },
    #[error("mass vector has {got} entries, characterization has {expected} bins")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("invalid mass vector: {0}")]
    InvalidMass(String),
    #[error("invalid free bin {0}: {1}")]
    InvalidFreeBin(usize, String),
}

/// One datum: the calibration error of an upstream module on one input and
/// the system cost the downstream decision maker incurred on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord<S> {
    pub l_value: S,
    pub cost: S,
}

/// Detection expected calibration error over equal-width confidence bins.
///
/// Bins are right-closed except the first, which also contains 0. Each
/// nonempty bin contributes `(n_b / N) · |precision_b − mean_confidence_b|`;
/// empty bins contribute nothing. Order-invariant: per-bin sums run over
/// sorted confidences.
pub fn d_ece<S: Real>(detections: &[(S, bool)], n_bins: usize) -> Result<S, CalibrationError> {
    if detections.is_empty() {
        return Err(CalibrationError::EmptyDetections);
    }
    if n_bins == 0 {
        return Err(CalibrationError::InvalidBinCount);
    }
    for (index, &(conf, _)) in detections.iter().enumerate() {
        if !(conf >= S::zero() && conf <= S::one()) {
            return Err(CalibrationError::ConfidenceOutOfRange {
                index,
                value: conf.as_f64(),
            });
        }
    }
    let mut confidences: Vec<Vec<S>> = vec![Vec::new(); n_bins];
    let mut matched = vec![0usize; n_bins];
    for &(conf, is_match) in detections {
        let b = confidence_bin(conf, n_bins);
        confidences[b].push(conf);
        if is_match {
            matched[b] += 1;
        }
    }
    let total = S::from_usize(detections.len()).unwrap();
    let mut ece = S::zero();
    for b in 0..n_bins {
        let n_b = confidences[b].len();
        if n_b == 0 {
            continue;
        }
        confidences[b].sort_unstable_by(|a, x| a.partial_cmp(x).expect("finite confidence"));
        let count = S::from_usize(n_b).unwrap();
        let mean_conf = confidences[b].iter().copied().sum::<S>() / count;
        let precision = S::from_usize(matched[b]).unwrap() / count;
        ece += count / total * (precision - mean_conf).abs();
    }
    Ok(ece)
}

/// Right-closed equal-width bin index over [0, 1]; the first bin is closed
/// on both ends.
fn confidence_bin<S: Real>(conf: S, n_bins: usize) -> usize {
    let scaled = (conf * S::from_usize(n_bins).unwrap()).ceil();
    let idx = scaled.to_usize().unwrap_or(0);
    idx.saturating_sub(1).min(n_bins - 1)
}

/// One bin of a characterization: how many records landed in it and, when
/// nonempty, the empirical probability that their cost exceeded the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationBin<S> {
    pub count: usize,
    /// `None` flags an empty bin with undefined weight.
    pub weight: Option<S>,
}

/// Binned estimate of `P(cost > c | l in bin k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characterization<S> {
    pub bin_edges: Vec<S>,
    pub threshold_c: S,
    pub bins: Vec<CharacterizationBin<S>>,
}

impl<S: Real> Characterization<S> {
    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn total_records(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// Bins records along the calibration-error axis and computes per-bin
/// violation probabilities. Bins are `[e_k, e_{k+1})`, the last closed.
pub fn characterize<S: Real>(
    records: &[CalibrationRecord<S>],
    bin_edges: &[S],
    c: S,
) -> Result<Characterization<S>, CalibrationError> {
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CalibrationError::InvalidEdges);
    }
    let n_bins = bin_edges.len() - 1;
    let lo = bin_edges[0];
    let hi = bin_edges[n_bins];
    let mut counts = vec![0usize; n_bins];
    let mut violations = vec![0usize; n_bins];
    for (index, r) in records.iter().enumerate() {
        if !(r.l_value.is_finite() && r.cost.is_finite()) {
            return Err(CalibrationError::NonFiniteRecord { index });
        }
        if r.l_value < lo || r.l_value > hi {
            return Err(CalibrationError::RecordOutsideEdges {
                index,
                l_value: r.l_value.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        let k = bin_edges.partition_point(|&e| e <= r.l_value).min(n_bins) - 1;
        counts[k] += 1;
        if r.cost > c {
            violations[k] += 1;
        }
    }
    let bins = counts
        .iter()
        .zip(&violations)
        .map(|(&n_k, &v_k)| CharacterizationBin {
            count: n_k,
            weight: (n_k > 0)
                .then(|| S::from_usize(v_k).unwrap() / S::from_usize(n_k).unwrap()),
        })
        .collect();
    Ok(Characterization {
        bin_edges: bin_edges.to_vec(),
        threshold_c: c,
        bins,
    })
}

/// Outcome of evaluating `P(cost > c) < α` under a candidate bin-mass vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecResult<S> {
    pub alpha: S,
    /// The weighted sum `Σ_k w_k · mass_k` over defined bins.
    pub value: S,
    pub satisfied: bool,
    pub margin: S,
    /// Bins that carry positive mass but have undefined weight; any such bin
    /// conservatively fails the spec.
    pub undefined_bins_with_mass: Vec<usize>,
}

/// Evaluates the discretized system specification against a mass vector over
/// the characterization's bins. Ties (`value == α`) count as unsatisfied.
pub fn check_spec<S: Real>(
    characterization: &Characterization<S>,
    mass: &[S],
    alpha: S,
) -> Result<SpecResult<S>, CalibrationError> {
    if mass.len() != characterization.num_bins() {
        return Err(CalibrationError::DimensionMismatch {
            got: mass.len(),
            expected: characterization.num_bins(),
        });
    }
    let mut total = S::zero();
    for (k, &m) in mass.iter().enumerate() {
        if !(m.is_finite() && m >= S::zero()) {
            return Err(CalibrationError::InvalidMass(format!(
                "mass[{k}] = {m} must be finite and nonnegative"
            )));
        }
        total += m;
    }
    let tol = S::from_f64_lossy(1e-9).max(S::epsilon() * S::from_f64_lossy(8.0));
    if (total - S::one()).abs() > tol {
        return Err(CalibrationError::InvalidMass(format!(
            "mass sums to {total}, expected 1"
        )));
    }

    let mut value = S::zero();
    let mut undefined = Vec::new();
    for (k, (bin, &m)) in characterization.bins.iter().zip(mass).enumerate() {
        match bin.weight {
            Some(w) => value += w * m,
            None if m > S::zero() => undefined.push(k),
            None => {}
        }
    }
    let satisfied = value < alpha && undefined.is_empty();
    Ok(SpecResult {
        alpha,
        value,
        satisfied,
        margin: alpha - value,
        undefined_bins_with_mass: undefined,
    })
}

/// Largest mass placeable on one bin while the specification still holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBound<S> {
    pub mass: S,
    /// `false` when no zero-weight bin can absorb the remaining mass, making
    /// the value an upper bound only.
    pub exact: bool,
}

/// Inverts the linear specification for `free_bin`: the largest mass the bin
/// can carry, with `fixed_mass` pinned elsewhere and the remainder parked on
/// a zero-weight bin. Nudged one rounding step inside the strict constraint
/// so the returned mass itself still satisfies the spec.
pub fn max_feasible_mass<S: Real>(
    characterization: &Characterization<S>,
    alpha: S,
    free_bin: usize,
    fixed_mass: &[(usize, S)],
) -> Result<MassBound<S>, CalibrationError> {
    let n_bins = characterization.num_bins();
    if free_bin >= n_bins {
        return Err(CalibrationError::InvalidFreeBin(
            free_bin,
            format!("only {n_bins} bins"),
        ));
    }
    let w_free = match characterization.bins[free_bin].weight {
        Some(w) if w > S::zero() => w,
        Some(_) => {
            return Err(CalibrationError::InvalidFreeBin(
                free_bin,
                "weight must be positive".into(),
            ))
        }
        None => {
            return Err(CalibrationError::InvalidFreeBin(
                free_bin,
                "bin is empty (undefined weight)".into(),
            ))
        }
    };

    let mut fixed_total = S::zero();
    let mut fixed_term = S::zero();
    for &(k, m) in fixed_mass {
        if k >= n_bins {
            return Err(CalibrationError::DimensionMismatch {
                got: k + 1,
                expected: n_bins,
            });
        }
        if k == free_bin {
            return Err(CalibrationError::InvalidMass(format!(
                "fixed mass given for the free bin {k}"
            )));
        }
        if !(m.is_finite() && m >= S::zero()) {
            return Err(CalibrationError::InvalidMass(format!(
                "fixed mass on bin {k} is {m}"
            )));
        }
        let w = characterization.bins[k].weight.ok_or_else(|| {
            CalibrationError::InvalidMass(format!("fixed mass on undefined bin {k}"))
        })?;
        fixed_total += m;
        fixed_term += w * m;
    }
    if fixed_total > S::one() {
        return Err(CalibrationError::InvalidMass(format!(
            "fixed mass sums to {fixed_total} > 1"
        )));
    }

    let headroom = S::one() - fixed_total;
    let slack = alpha.abs().max(S::one()) * S::epsilon() * S::from_f64_lossy(8.0);
    let raw = (alpha - slack - fixed_term) / w_free;
    let mass = raw.min(headroom).max(S::zero());

    let remainder = headroom - mass;
    let zero_weight_available = characterization.bins.iter().enumerate().any(|(k, bin)| {
        k != free_bin
            && !fixed_mass.iter().any(|&(j, _)| j == k)
            && bin.weight == Some(S::zero())
    });
    let exact = remainder <= slack || zero_weight_available;
    Ok(MassBound { mass, exact })
}

/// Empirical `P(cost > c)` over the records.
pub fn total_violation_probability<S: Real>(records: &[CalibrationRecord<S>], c: S) -> S {
    assert!(!records.is_empty(), "records must be nonempty");
    let violations = records.iter().filter(|r| r.cost > c).count();
    S::from_usize(violations).unwrap() / S::from_usize(records.len()).unwrap()
}
