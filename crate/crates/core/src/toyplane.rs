//! The two-dimensional stability plane of the quadratic-interaction toy
//! model: classify (a, b) cells, trace product loci, and estimate the
//! stability probability when the off-diagonal pair is bivariate normal.
//!
//! The toy Jacobian `[[-1, a], [b, -1]]` is stable exactly when `ab < 1`,
//! which makes this plane a cheap reference problem: the closed form and
//! the eigenvalue path must agree everywhere off the boundary.

use crate::models::toy_jacobian;
use crate::rng::substream;
use crate::sampler::StabilityEstimate;
use crate::{linalg, Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Width of the `ab = 1` boundary band inside which the closed form and
/// the eigenvalue path are not compared (rounding may differ there).
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Number of leading draws whose closed-form region test is re-verified
/// against the eigenvalue path.
pub const CROSS_CHECK_DRAWS: usize = 256;

/// A rectangular (a, b) window classified at cell centers.
#[derive(Debug, Clone)]
pub struct PlaneGridSpec {
    /// Inclusive a-axis window.
    pub a_range: (f64, f64),
    /// Inclusive b-axis window.
    pub b_range: (f64, f64),
    /// Number of cells per axis (≥ 2).
    pub resolution: usize,
}

/// Per-cell stability classification of a plane window.
#[derive(Debug, Clone)]
pub struct PlaneRegionGrid {
    /// The window and resolution the grid was built from.
    pub spec: PlaneGridSpec,
    /// Cell centers along the a-axis.
    pub a_centers: Vec<f64>,
    /// Cell centers along the b-axis.
    pub b_centers: Vec<f64>,
    /// `stable[a_index][b_index]`, classified at the cell center.
    pub stable: Vec<Vec<bool>>,
}

/// Bivariate normal law for the off-diagonal pair (a, b).
#[derive(Debug, Clone)]
pub struct Gaussian2x2Spec {
    /// Mean of (a, b).
    pub mean: [f64; 2],
    /// Covariance of (a, b); symmetric positive definite.
    pub covariance: [[f64; 2]; 2],
}

impl Gaussian2x2Spec {
    /// Validate and build a spec.
    pub fn new(mean: [f64; 2], covariance: [[f64; 2]; 2]) -> Result<Gaussian2x2Spec> {
        let flat = [
            mean[0],
            mean[1],
            covariance[0][0],
            covariance[0][1],
            covariance[1][0],
            covariance[1][1],
        ];
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "bivariate normal spec has non-finite entries".into(),
            ));
        }
        if covariance[0][1] != covariance[1][0] {
            return Err(Error::NotPositiveDefinite(
                "covariance is not symmetric".into(),
            ));
        }
        let det = covariance[0][0] * covariance[1][1] - covariance[0][1] * covariance[1][0];
        if covariance[0][0] <= 0.0 || det <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "covariance has a non-positive eigenvalue (leading minors {}, {det})",
                covariance[0][0]
            )));
        }
        Ok(Gaussian2x2Spec { mean, covariance })
    }

    /// Build from per-axis standard deviations and a correlation.
    pub fn from_correlation(
        mean: [f64; 2],
        sd: [f64; 2],
        correlation: f64,
    ) -> Result<Gaussian2x2Spec> {
        let off = correlation * sd[0] * sd[1];
        Gaussian2x2Spec::new(mean, [[sd[0] * sd[0], off], [off, sd[1] * sd[1]]])
    }
}

/// Whether the toy Jacobian at (a, b) is stable, via the eigenvalue path.
pub fn stable_at(a: f64, b: f64) -> Result<bool> {
    linalg::is_stable(&toy_jacobian(a, b))
}

/// Classify every cell center of a plane window through the eigenvalue
/// path (the closed form `ab < 1` is used only in tests and cross-checks).
pub fn classify_plane(spec: &PlaneGridSpec) -> Result<PlaneRegionGrid> {
    if spec.resolution < 2 {
        return Err(Error::InvalidInput(
            "plane grid needs a resolution of at least 2".into(),
        ));
    }
    for (lo, hi) in [spec.a_range, spec.b_range] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidRange {
                name: "plane window".into(),
                lo,
                hi,
            });
        }
    }
    let cell_centers = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let width = (hi - lo) / spec.resolution as f64;
        (0..spec.resolution)
            .map(|k| lo + (k as f64 + 0.5) * width)
            .collect()
    };
    let a_centers = cell_centers(spec.a_range);
    let b_centers = cell_centers(spec.b_range);
    let mut stable = Vec::with_capacity(a_centers.len());
    for &a in &a_centers {
        let mut row = Vec::with_capacity(b_centers.len());
        for &b in &b_centers {
            row.push(stable_at(a, b)?);
        }
        stable.push(row);
    }
    Ok(PlaneRegionGrid {
        spec: spec.clone(),
        a_centers,
        b_centers,
        stable,
    })
}

/// Estimate the stability probability when (a, b) is drawn from a
/// bivariate normal.
///
/// Each draw uses the closed-form region test `ab < 1`; the first
/// [`CROSS_CHECK_DRAWS`] draws are re-verified against the eigenvalue
/// path (off the boundary band), so a disagreement fails loudly instead
/// of skewing the estimate.
pub fn gaussian2x2_stability(
    spec: &Gaussian2x2Spec,
    sample_count: usize,
    seed: u64,
) -> Result<StabilityEstimate> {
    if sample_count == 0 {
        return Err(Error::InvalidInput(
            "stability estimation needs at least one draw".into(),
        ));
    }
    // Re-validate so hand-built specs cannot smuggle in a bad covariance.
    let spec = Gaussian2x2Spec::new(spec.mean, spec.covariance)?;
    let l11 = spec.covariance[0][0].sqrt();
    let l21 = spec.covariance[0][1] / l11;
    let l22 = (spec.covariance[1][1] - l21 * l21).sqrt();
    let mut stable_count = 0usize;
    for draw in 0..sample_count {
        let mut rng = substream(seed, "gaussian2x2", draw as u64);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let a = spec.mean[0] + l11 * z1;
        let b = spec.mean[1] + l21 * z1 + l22 * z2;
        let stable = a * b < 1.0;
        if draw < CROSS_CHECK_DRAWS && (a * b - 1.0).abs() > BOUNDARY_BAND {
            assert_eq!(
                stable,
                stable_at(a, b)?,
                "closed-form and eigenvalue stability disagree at ({a}, {b})"
            );
        }
        if stable {
            stable_count += 1;
        }
    }
    Ok(StabilityEstimate::from_counts(stable_count, sample_count))
}

/// Points (a, b = product / a) of a constant-product locus, skipping the
/// singular strip |a| < 1e-9.
pub fn locus_curve(product: f64, a_range: (f64, f64), points: usize) -> Vec<(f64, f64)> {
    if points == 0 || !(a_range.0.is_finite() && a_range.1.is_finite()) {
        return Vec::new();
    }
    let (lo, hi) = a_range;
    let step = if points > 1 {
        (hi - lo) / (points - 1) as f64
    } else {
        0.0
    };
    (0..points)
        .map(|k| lo + k as f64 * step)
        .filter(|a| a.abs() >= 1e-9)
        .map(|a| (a, product / a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_checks_match_the_closed_form_region() {
        assert!(stable_at(0.0, 0.0).unwrap());
        assert!(!stable_at(2.0, 2.0).unwrap());
        assert!(stable_at(-5.0, 5.0).unwrap());
    }

    #[test]
    fn grid_classification_equals_the_product_rule() {
        let grid = classify_plane(&PlaneGridSpec {
            a_range: (-3.0, 3.0),
            b_range: (-3.0, 3.0),
            resolution: 40,
        })
        .unwrap();
        assert_eq!(grid.a_centers.len(), 40);
        for (i, &a) in grid.a_centers.iter().enumerate() {
            for (j, &b) in grid.b_centers.iter().enumerate() {
                if (a * b - 1.0).abs() <= BOUNDARY_BAND {
                    continue;
                }
                assert_eq!(grid.stable[i][j], a * b < 1.0, "at ({a}, {b})");
            }
        }
    }

    #[test]
    fn invalid_windows_and_resolutions_are_rejected() {
        let bad_res = classify_plane(&PlaneGridSpec {
            a_range: (-1.0, 1.0),
            b_range: (-1.0, 1.0),
            resolution: 1,
        });
        assert!(bad_res.is_err());
        let bad_range = classify_plane(&PlaneGridSpec {
            a_range: (1.0, -1.0),
            b_range: (-1.0, 1.0),
            resolution: 4,
        });
        assert!(matches!(bad_range, Err(Error::InvalidRange { .. })));
    }

    #[test]
    fn degenerate_covariances_are_rejected() {
        assert!(matches!(
            Gaussian2x2Spec::new([0.0, 0.0], [[1.0, 0.5], [0.4, 1.0]]),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            Gaussian2x2Spec::new([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]]),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(Gaussian2x2Spec::from_correlation([0.0, 0.0], [1.0, 1.0], 0.9).is_ok());
        assert!(Gaussian2x2Spec::from_correlation([0.0, 0.0], [1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn concentrated_mass_at_the_origin_is_always_stable() {
        let spec =
            Gaussian2x2Spec::new([0.0, 0.0], [[1e-6, 0.0], [0.0, 1e-6]]).unwrap();
        let est = gaussian2x2_stability(&spec, 2000, 7).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.se, 0.0);
    }

    #[test]
    fn negative_correlation_is_more_stable_than_positive() {
        let minus = Gaussian2x2Spec::from_correlation([0.0, 0.0], [1.0, 1.0], -0.9).unwrap();
        let plus = Gaussian2x2Spec::from_correlation([0.0, 0.0], [1.0, 1.0], 0.9).unwrap();
        let p_minus = gaussian2x2_stability(&minus, 20_000, 11).unwrap();
        let p_plus = gaussian2x2_stability(&plus, 20_000, 11).unwrap();
        let gap = (p_minus.se.powi(2) + p_plus.se.powi(2)).sqrt();
        assert!(
            p_minus.p_hat > p_plus.p_hat + 4.0 * gap,
            "{} vs {}",
            p_minus.p_hat,
            p_plus.p_hat
        );
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let spec = Gaussian2x2Spec::from_correlation([0.5, -0.5], [2.0, 0.5], 0.3).unwrap();
        let a = gaussian2x2_stability(&spec, 5000, 42).unwrap();
        let b = gaussian2x2_stability(&spec, 5000, 42).unwrap();
        assert_eq!(a.p_hat, b.p_hat);
        assert_eq!(a.stable_count, b.stable_count);
    }

    #[test]
    fn locus_points_multiply_back_to_the_product() {
        let pts = locus_curve(2.0, (0.25, 4.0), 16);
        assert_eq!(pts.len(), 16);
        for (a, b) in pts {
            assert!((a * b - 2.0).abs() <= 1e-12);
        }
        // A window straddling zero drops the singular strip.
        let spanning = locus_curve(3.0, (-1.0, 1.0), 3);
        assert_eq!(spanning.len(), 2);
    }
}
