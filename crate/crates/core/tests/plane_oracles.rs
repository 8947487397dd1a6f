//! Quadrature oracles for the two-parameter toy plane: the Monte Carlo
//! stability probability under a standard normal cloud must agree with a
//! numerically integrated ground truth, and shifting the mean across the
//! boundary must move the estimate the right way.

use stabens::toyplane::{gaussian2x2_stability, Gaussian2x2Spec};

/// Composite Simpson rule on a fixed interval.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = panels * 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF by quadrature; exact to far beyond the test tolerance.
fn normal_cdf(x: f64) -> f64 {
    let t = x.clamp(-10.0, 10.0);
    0.5 + simpson(phi, 0.0, t, 500)
}

#[test]
fn standard_normal_cloud_matches_the_quadrature_probability() {
    // Stability is the event a*b < 1. Splitting on the sign of `a` and using
    // the a -> -a symmetry, the probability is 2 * ∫_0^∞ φ(a) Φ(1/a) da.
    let truth = 2.0 * simpson(|a| phi(a) * normal_cdf(1.0 / a.max(1e-12)), 0.0, 12.0, 3_000);

    let spec = Gaussian2x2Spec::from_correlation([0.0, 0.0], [1.0, 1.0], 0.0).unwrap();
    let est = gaussian2x2_stability(&spec, 20_000, 41).unwrap();
    assert!(
        (est.p_hat - truth).abs() <= 3.0 * est.se,
        "estimate {} vs quadrature {truth} (se {})",
        est.p_hat,
        est.se
    );
}

#[test]
fn pushing_the_mean_across_the_boundary_flips_the_odds() {
    let n = 20_000;
    let minus = Gaussian2x2Spec::from_correlation([-2.0, 2.0], [1.0, 1.0], 0.0).unwrap();
    let plus = Gaussian2x2Spec::from_correlation([2.0, 2.0], [1.0, 1.0], 0.0).unwrap();
    let em = gaussian2x2_stability(&minus, n, 42).unwrap();
    let ep = gaussian2x2_stability(&plus, n, 43).unwrap();
    let combined = (em.se * em.se + ep.se * ep.se).sqrt();
    assert!(
        em.p_hat > ep.p_hat + 3.0 * combined,
        "mean (-2,2) gave {} vs mean (2,2) {} (combined se {combined})",
        em.p_hat,
        ep.p_hat
    );
}
