//! Seeded statistical checks on generators and the spherical-cap bound.

use tsne_forensics_core::datasets::{
    sample_sphere, sample_split_sphere, split_threshold, DEFAULT_SPLIT_EXPONENT,
};
use tsne_forensics_core::diagnostics::cap_measure_bound;
use tsne_forensics_core::matrix::{pairs, squared_distance};

/// Fraction of uniform sphere samples within distance `r` of the pole e₁,
/// drawn in chunks so memory stays bounded.
fn monte_carlo_cap(r: f64, d: usize, samples: usize, base_seed: u64) -> f64 {
    let chunk = 100_000;
    let threshold = 1.0 - r * r / 2.0; // ‖x − e₁‖ ≤ r ⇔ x₁ ≥ 1 − r²/2
    let mut hits = 0usize;
    let mut drawn = 0usize;
    let mut k = 0;
    while drawn < samples {
        let m = chunk.min(samples - drawn);
        let cloud = sample_sphere(m, d, base_seed.wrapping_add(k)).unwrap();
        hits += cloud
            .points
            .iter_rows()
            .filter(|x| x[0] >= threshold)
            .count();
        drawn += m;
        k += 1;
    }
    hits as f64 / samples as f64
}

#[test]
fn cap_bound_dominates_monte_carlo_in_ten_dimensions() {
    let bound = cap_measure_bound(0.2, 10).unwrap();
    assert!((bound - 6.758e-8).abs() < 0.001e-8, "{bound}");
    let estimate = monte_carlo_cap(0.2, 10, 10_000_000, 1000);
    assert!(estimate <= bound, "estimate {estimate} vs bound {bound}");
}

#[test]
fn cap_bound_dominates_resolvable_caps() {
    // large caps where the estimate has many hits
    for (r, d) in [(1.0, 10), (0.8, 5), (1.2, 20)] {
        let bound = cap_measure_bound(r, d).unwrap();
        let estimate = monte_carlo_cap(r, d, 400_000, 7);
        assert!(estimate > 0.0);
        assert!(
            estimate <= bound,
            "r = {r}, d = {d}: estimate {estimate} vs bound {bound}"
        );
    }
}

#[test]
fn cap_bound_dominates_monte_carlo_in_thirty_dimensions() {
    let bound = cap_measure_bound(0.2, 30).unwrap();
    assert!(monte_carlo_cap(0.2, 30, 1_000_000, 3) < bound);
}

#[test]
fn high_dimensional_sphere_pairs_are_well_separated() {
    for seed in 0..5 {
        let cloud = sample_sphere(1000, 30, seed).unwrap();
        for (i, j) in pairs(1000) {
            let d2 = squared_distance(cloud.points.row(i), cloud.points.row(j));
            assert!(
                (0.04..=4.0).contains(&d2),
                "seed {seed}: pair ({i}, {j}) at squared distance {d2}"
            );
        }
    }
}

#[test]
fn split_sphere_respects_threshold_and_balance() {
    let (n, d) = (1000, 20);
    let t = split_threshold(d, DEFAULT_SPLIT_EXPONENT);
    assert!((t - 0.741134).abs() < 1e-6, "{t}");
    let cloud = sample_split_sphere(n, d, 4, DEFAULT_SPLIT_EXPONENT).unwrap();
    let labels = cloud.labels.as_ref().unwrap();
    let mut positives = 0;
    for (row, &label) in cloud.points.iter_rows().zip(labels) {
        assert!(row[0].abs() >= t);
        assert_eq!(label, i64::from(row[0] > 0.0));
        positives += label;
    }
    // symmetric acceptance: binomial(1000, 1/2) within 5 standard deviations
    assert!((positives as f64 - 500.0).abs() <= 5.0 * 250f64.sqrt());
    let again = sample_split_sphere(n, d, 4, DEFAULT_SPLIT_EXPONENT).unwrap();
    assert_eq!(cloud.points.as_slice(), again.points.as_slice());
}
