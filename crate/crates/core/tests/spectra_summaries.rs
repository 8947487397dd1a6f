//! End-to-end checks of the spectral summaries on real sampled ensembles:
//! a model whose leading eigenvalues are all negative, one whose equilibrium
//! branch pins the spectrum to two exact points, and one with a genuinely
//! mixed stability outcome. Property tests cover order invariance and the
//! kernel-density normalization on arbitrary scalar ensembles.

use proptest::prelude::*;
use stabens::ensembles::EnsembleKind;
use stabens::equilibria::Branch;
use stabens::models::Model;
use stabens::sampler::{
    sample_fcs, stability_probability, Ensemble, EquilibriumMode, ParameterRanges, Recipe,
    SamplerConfig,
};
use stabens::stats::{leading_summary, spectra, KdeConfig};
use stabens::RealMatrix;

fn fcs(model: Model, branch: Branch, n: usize, seed: u64) -> Ensemble {
    let ranges = ParameterRanges::defaults(&model);
    let cfg = SamplerConfig::new(n, seed);
    sample_fcs(&model, &ranges, &cfg, branch).unwrap()
}

fn kde_integral(kde: &[(f64, f64)]) -> f64 {
    kde.windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

fn kde_mass_below(kde: &[(f64, f64)], threshold: f64) -> f64 {
    kde.windows(2)
        .filter(|w| w[1].0 <= threshold)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

#[test]
fn always_stable_model_concentrates_the_leading_density_below_zero() {
    let e = fcs(Model::Seir, Branch::Endemic, 10_000, 31);
    let s = leading_summary(&e, &KdeConfig::default()).unwrap();
    assert_eq!(s.stability.p_hat, 1.0);
    assert_eq!(s.stability.se, 0.0);
    assert!(s.leading.iter().all(|x| *x < 0.0));
    assert!(s.q1 <= s.median && s.median <= s.q3);
    assert!((kde_integral(&s.kde) - 1.0).abs() <= 1e-3);
    assert!(kde_mass_below(&s.kde, 0.0) >= 0.98);
}

#[test]
fn quadratic_toy_branch_pins_the_spectrum_to_two_exact_points() {
    // At the nontrivial equilibrium of the quadratic toy, the off-diagonal
    // product is exactly 2 for every parameter draw, so the spectrum is
    // always {-1 - sqrt(2), -1 + sqrt(2)} and the system is never stable.
    let e = fcs(Model::Toy2, Branch::Ep2, 500, 32);
    let lo = -1.0 - 2.0f64.sqrt();
    let hi = -1.0 + 2.0f64.sqrt();
    for s in spectra(&e).unwrap() {
        let mut reals: Vec<f64> = s
            .eigenvalues()
            .iter()
            .map(|z| {
                assert_eq!(z.im, 0.0);
                z.re
            })
            .collect();
        reals.sort_unstable_by(f64::total_cmp);
        assert!((reals[0] - lo).abs() <= 1e-9, "{} vs {lo}", reals[0]);
        assert!((reals[1] - hi).abs() <= 1e-9, "{} vs {hi}", reals[1]);
    }
    let summary = leading_summary(&e, &KdeConfig::default()).unwrap();
    assert_eq!(summary.stability.p_hat, 0.0);
    assert!((summary.median - hi).abs() <= 1e-9);
    assert!((summary.q1 - hi).abs() <= 1e-9);
    assert!((summary.q3 - hi).abs() <= 1e-9);
}

#[test]
fn mixed_outcome_mass_below_zero_tracks_the_stability_estimate() {
    let e = fcs(Model::Lorenz, Branch::Plus, 10_000, 33);
    let s = leading_summary(&e, &KdeConfig::default()).unwrap();
    assert!(
        s.stability.p_hat > 0.0 && s.stability.p_hat < 1.0,
        "expected a mixed outcome, got {}",
        s.stability.p_hat
    );
    assert!((kde_integral(&s.kde) - 1.0).abs() <= 1e-3);
    assert!(kde_mass_below(&s.kde, 0.0) >= s.stability.p_hat - 0.02);
}

#[test]
fn summary_stability_is_bitwise_equal_to_the_direct_estimate() {
    for (model, branch, seed) in [
        (Model::Lorenz, Branch::Plus, 34),
        (Model::Seir, Branch::Endemic, 35),
        (Model::Toy1, Branch::Origin, 36),
    ] {
        let e = fcs(model, branch, 2000, seed);
        let direct = stability_probability(&e).unwrap();
        let s = leading_summary(&e, &KdeConfig::default()).unwrap();
        assert_eq!(s.stability.p_hat, direct.p_hat);
        assert_eq!(s.stability.se, direct.se);
    }
}

fn scalar_ensemble(values: &[f64]) -> Ensemble {
    let recipe = Recipe {
        model: Model::Toy1,
        branch: Branch::Origin,
        ranges: Model::Toy1.default_ranges(),
        seed: 0,
        kind: EnsembleKind::Fcs,
        mode: EquilibriumMode::Analytic,
    };
    let matrices = values
        .iter()
        .map(|v| RealMatrix::from_element(1, 1, *v))
        .collect();
    Ensemble::from_matrices(recipe, matrices, 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn scalar_summaries_are_order_invariant_and_normalized(
        values in prop::collection::vec(-50.0f64..50.0, 2..120),
        rotation in 0usize..120,
    ) {
        let cfg = KdeConfig::default();
        let s = leading_summary(&scalar_ensemble(&values), &cfg).unwrap();
        prop_assert!(s.q1 <= s.median && s.median <= s.q3);
        prop_assert!((kde_integral(&s.kde) - 1.0).abs() <= 1e-3);
        prop_assert!(kde_mass_below(&s.kde, 0.0) >= s.stability.p_hat - 0.02);

        let mut rotated = values.clone();
        rotated.rotate_left(rotation % values.len());
        let r = leading_summary(&scalar_ensemble(&rotated), &cfg).unwrap();
        prop_assert_eq!(s.median, r.median);
        prop_assert_eq!(s.q1, r.q1);
        prop_assert_eq!(s.q3, r.q3);
        prop_assert_eq!(s.stability.p_hat, r.stability.p_hat);
        prop_assert_eq!(s.bandwidth, r.bandwidth);
    }
}
