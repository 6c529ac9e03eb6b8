//! Oracle and property tests for the calibration-specification module.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use robspec_core::calibration::{
    characterize, check_spec, d_ece, max_feasible_mass, total_violation_probability,
    CalibrationRecord, Characterization, CharacterizationBin,
};

/// Twelve hand-written detections spread over three confidence bins, with
/// the per-bin contributions worked out by hand.
#[test]
fn dece_matches_hand_computed_bin_sums() {
    // Bin (0.2, 0.3]: confidences 0.25, 0.25, 0.3, 0.22; 1 matched.
    // Bin (0.5, 0.6]: confidences 0.55, 0.6, 0.52; 2 matched.
    // Bin (0.9, 1.0]: confidences 0.95, 1.0, 0.92, 0.98, 0.91; 4 matched.
    let detections = vec![
        (0.25, false),
        (0.25, true),
        (0.30, false),
        (0.22, false),
        (0.55, true),
        (0.60, false),
        (0.52, true),
        (0.95, true),
        (1.00, true),
        (0.92, false),
        (0.98, true),
        (0.91, true),
    ];
    let bin1_conf = (0.25 + 0.25 + 0.30 + 0.22) / 4.0;
    let bin1 = (4.0 / 12.0) * (0.25_f64 - bin1_conf).abs();
    let bin2_conf = (0.55 + 0.60 + 0.52) / 3.0;
    let bin2 = (3.0 / 12.0) * (2.0_f64 / 3.0 - bin2_conf).abs();
    let bin3_conf = (0.95 + 1.00 + 0.92 + 0.98 + 0.91) / 5.0;
    let bin3 = (5.0 / 12.0) * (4.0_f64 / 5.0 - bin3_conf).abs();
    let expected = bin1 + bin2 + bin3;
    let got = d_ece(&detections, 10).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

fn record_set_strategy() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec((0.0f64..=1.0, any::<bool>()), 1..80)
}

proptest! {
    /// D-ECE ignores detection order and stays in [0, 1].
    #[test]
    fn dece_is_order_invariant_and_bounded(
        detections in record_set_strategy(),
        n_bins in 1usize..20,
        swap in any::<u64>(),
    ) {
        let forward = d_ece(&detections, n_bins).unwrap();
        prop_assert!((0.0..=1.0).contains(&forward));
        let mut shuffled = detections.clone();
        let mut rng = ChaCha20Rng::seed_from_u64(swap);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let backward = d_ece(&shuffled, n_bins).unwrap();
        prop_assert_eq!(forward, backward);
    }

    /// Law of total probability: P(cost > c) = Σ_k w_k n_k / N exactly
    /// (within accumulation rounding) for any records and covering edges.
    #[test]
    fn violation_probability_decomposes_over_bins(seed in 0u64..100_000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = rng.random_range(1..200usize);
        let records: Vec<CalibrationRecord<f64>> = (0..n)
            .map(|_| CalibrationRecord {
                l_value: rng.random_range(0.0..1.0),
                cost: rng.random_range(-1.0..2.0),
            })
            .collect();
        let n_bins = rng.random_range(1..12usize);
        let edges: Vec<f64> = (0..=n_bins).map(|k| k as f64 / n_bins as f64).collect();
        let c = rng.random_range(-0.5..1.5);

        let ch = characterize(&records, &edges, c).unwrap();
        let total = total_violation_probability(&records, c);
        let decomposed: f64 = ch
            .bins
            .iter()
            .filter_map(|b| b.weight.map(|w| w * b.count as f64 / n as f64))
            .sum();
        prop_assert!((total - decomposed).abs() < 1e-12);
        prop_assert_eq!(ch.total_records(), n);
    }
}

fn char_with_weights(weights: &[Option<f64>]) -> Characterization<f64> {
    Characterization {
        bin_edges: (0..=weights.len()).map(|k| k as f64).collect(),
        threshold_c: 0.5,
        bins: weights
            .iter()
            .map(|w| CharacterizationBin {
                count: if w.is_some() { 5 } else { 0 },
                weight: *w,
            })
            .collect(),
    }
}

/// check_spec value equals a plain dot product over ten random bins.
#[test]
fn check_spec_matches_dot_product_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(1234);
    for _ in 0..200 {
        let weights: Vec<Option<f64>> = (0..10).map(|_| Some(rng.random_range(0.0..1.0))).collect();
        let raw: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mass: Vec<f64> = raw.iter().map(|m| m / total).collect();
        let ch = char_with_weights(&weights);
        let result = check_spec(&ch, &mass, 0.5).unwrap();
        let oracle: f64 = weights
            .iter()
            .zip(&mass)
            .map(|(w, m)| w.unwrap() * m)
            .sum();
        assert!((result.value - oracle).abs() < 1e-12);
        assert_eq!(result.satisfied, oracle < 0.5);
        assert!((result.margin - (0.5 - result.value)).abs() < 1e-15);
    }
}

/// Raising any weight or shifting mass toward a heavier bin never lowers
/// the spec value.
#[test]
fn check_spec_value_is_monotone() {
    let mut rng = ChaCha20Rng::seed_from_u64(777);
    for _ in 0..100 {
        let weights: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
        let raw: Vec<f64> = (0..6).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mass: Vec<f64> = raw.iter().map(|m| m / total).collect();
        let ch = char_with_weights(&weights.iter().map(|&w| Some(w)).collect::<Vec<_>>());
        let base = check_spec(&ch, &mass, 0.9).unwrap().value;

        let bump = rng.random_range(0..6usize);
        let mut bumped_weights = weights.clone();
        bumped_weights[bump] = (bumped_weights[bump] + 0.2).min(1.0);
        let ch_bumped =
            char_with_weights(&bumped_weights.iter().map(|&w| Some(w)).collect::<Vec<_>>());
        assert!(check_spec(&ch_bumped, &mass, 0.9).unwrap().value >= base - 1e-15);

        // Move mass from the lightest-weight bin to the heaviest-weight bin.
        let heavy = (0..6).max_by(|&i, &j| weights[i].total_cmp(&weights[j])).unwrap();
        let light = (0..6).min_by(|&i, &j| weights[i].total_cmp(&weights[j])).unwrap();
        if heavy != light {
            let mut shifted = mass.clone();
            let moved = shifted[light] * 0.5;
            shifted[light] -= moved;
            shifted[heavy] += moved;
            assert!(check_spec(&ch, &shifted, 0.9).unwrap().value >= base - 1e-12);
        }
    }
}

/// Brute-force grid search over the free-bin mass in steps of 1e-3.
#[test]
fn max_feasible_mass_matches_grid_search_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    for _ in 0..100 {
        // Bin 0: free with positive weight; bin 1: zero-weight sink;
        // bin 2: fixed mass with random weight.
        let w_free = rng.random_range(0.05..1.0);
        let w_fixed = rng.random_range(0.0..1.0);
        let fixed = rng.random_range(0.0..0.6);
        let alpha = rng.random_range(0.02..0.8);
        let ch = char_with_weights(&[Some(w_free), Some(0.0), Some(w_fixed)]);

        let bound = max_feasible_mass(&ch, alpha, 0, &[(2, fixed)]).unwrap();
        assert!(bound.exact);

        let mut best_grid = None;
        for step in 0..=1000 {
            let m = step as f64 / 1000.0;
            if m > 1.0 - fixed + 1e-12 {
                break;
            }
            let remainder = 1.0 - fixed - m;
            let mass = vec![m, remainder, fixed];
            if check_spec(&ch, &mass, alpha).unwrap().satisfied {
                best_grid = Some(m);
            }
        }
        match best_grid {
            Some(best_grid) => assert!(
                (bound.mass - best_grid).abs() <= 1e-3 + 1e-9,
                "analytic {} vs grid {best_grid} (w_free {w_free}, fixed {fixed}, α {alpha})",
                bound.mass
            ),
            // The fixed mass alone already violates the spec.
            None => assert_eq!(bound.mass, 0.0),
        }
    }
}

/// The returned mass satisfies the spec; one grid step more does not.
#[test]
fn max_feasible_mass_sits_on_the_feasibility_boundary() {
    let mut rng = ChaCha20Rng::seed_from_u64(4096);
    for _ in 0..200 {
        let w_free = rng.random_range(0.05..1.0);
        let alpha = rng.random_range(0.02..0.6);
        let fixed = rng.random_range(0.0..0.5);
        let ch = char_with_weights(&[Some(w_free), Some(0.0), Some(0.0)]);
        let bound = max_feasible_mass(&ch, alpha, 0, &[(2, fixed)]).unwrap();

        let headroom = 1.0 - fixed;
        let place = |m: f64| {
            let mass = vec![m, headroom - m, fixed];
            check_spec(&ch, &mass, alpha).unwrap().satisfied
        };
        assert!(place(bound.mass), "returned mass must satisfy the spec");
        if bound.mass + 1e-3 <= headroom {
            assert!(
                !place(bound.mass + 1e-3),
                "mass {} + 1e-3 should violate the spec",
                bound.mass
            );
        }
    }
}
