//! The Pearson distribution system: selection and sampling of the family
//! member matching a given skewness and (raw) kurtosis.
//!
//! All members here describe the *standardized* variable (mean 0, standard
//! deviation 1); callers rescale by their own mean and deviation. The
//! classification works with the unnormalized quadratic
//! `Q(x) = B0 + B1 x + B2 x²` and numerator `N(x) = B1 + D x` of the
//! density's logarithmic derivative `p'/p = -N(x)/Q(x)`, where
//!
//! ```text
//! b1 = γ²,  B0 = 4κ - 3 b1,  B1 = γ (κ + 3),
//! B2 = 2κ - 3 b1 - 6,        D  = 10κ - 12 b1 - 18,
//! ```
//!
//! avoiding the singular division by `D` of the textbook normalization.
//! The selector is `k = B1² / (4 B0 B2)`: each sign/size regime maps to a
//! classical type, realized by transformed beta, gamma, beta-prime, or
//! Student draws, with type IV handled by an exact rejection sampler.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal, StudentT};
use std::f64::consts::FRAC_PI_2;

/// Moment pairs closer to the two-point boundary `κ = γ² + 1` than this are
/// rejected: the only matching law is a two-point distribution.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Skewness magnitudes at or below this are treated as symmetric.
const SYMMETRY_TOL: f64 = 1e-10;

/// A member of the Pearson system, standardized, ready to sample.
#[derive(Debug, Clone)]
pub enum PearsonMember {
    /// The Gaussian case (γ = 0, κ = 3).
    Normal,
    /// Type I: bounded support, a shifted/scaled beta.
    TypeI {
        /// Left support endpoint.
        left: f64,
        /// Support width.
        width: f64,
        /// Underlying beta law on (0, 1).
        beta: Beta<f64>,
    },
    /// Type II: symmetric bounded support (γ = 0, κ < 3), a symmetric beta.
    TypeII {
        /// Half-width of the support `[-h, h]`.
        half_width: f64,
        /// Symmetric beta law on (0, 1).
        beta: Beta<f64>,
    },
    /// Type III: a shifted/scaled gamma.
    TypeIII {
        /// Gamma shape, `4/γ²`.
        shape: f64,
        /// Scale `γ/2` (negative skew flips the tail).
        scale: f64,
        /// Underlying unit-scale gamma law.
        gamma: Gamma<f64>,
    },
    /// Type IV: unbounded support, no real quadratic roots.
    TypeIV(TypeIv),
    /// Type V: one-sided support off a double root, an inverse gamma.
    TypeV {
        /// The double root of `Q`.
        root: f64,
        /// +1 for support right of the root, -1 for left.
        side: f64,
        /// Inverse-gamma scale.
        scale: f64,
        /// Underlying unit-scale gamma law (reciprocal taken at sampling).
        gamma: Gamma<f64>,
    },
    /// Type VI: one-sided support beyond both real roots, a beta-prime.
    TypeVI {
        /// Support endpoint (the root nearer the body of the mass).
        anchor: f64,
        /// Distance between the two roots.
        width: f64,
        /// +1 for support right of the anchor, -1 for left.
        side: f64,
        /// Numerator gamma of the beta-prime ratio.
        numerator: Gamma<f64>,
        /// Denominator gamma of the beta-prime ratio.
        denominator: Gamma<f64>,
    },
    /// Type VII: symmetric heavy tails (γ = 0, κ > 3), a scaled Student t.
    TypeVII {
        /// Scale `sqrt((ν-2)/ν)` giving unit variance.
        scale: f64,
        /// Underlying Student t law.
        student: StudentT<f64>,
    },
}

impl PearsonMember {
    /// Classify the member matching `(skewness, kurtosis)` (kurtosis raw,
    /// Gaussian = 3) and precompute everything sampling needs.
    ///
    /// Fails when the pair sits at or below the two-point boundary
    /// `κ = γ² + 1` (within [`BOUNDARY_TOL`]): no nondegenerate member
    /// exists there.
    pub fn classify(skewness: f64, kurtosis: f64) -> Result<PearsonMember> {
        if !(skewness.is_finite() && kurtosis.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "moments must be finite, got skewness {skewness}, kurtosis {kurtosis}"
            )));
        }
        let b1 = skewness * skewness;
        let bound = b1 + 1.0;
        if kurtosis <= bound + BOUNDARY_TOL {
            return Err(Error::InfeasibleMoments {
                kurtosis,
                bound,
            });
        }
        if skewness.abs() <= SYMMETRY_TOL {
            return if (kurtosis - 3.0).abs() <= 1e-10 {
                Ok(PearsonMember::Normal)
            } else if kurtosis < 3.0 {
                // Symmetric bounded: density ∝ (1 - x²/h²)^(α-1).
                let alpha = 3.0 * (kurtosis - 1.0) / (2.0 * (3.0 - kurtosis));
                let half_width = (2.0 * kurtosis / (3.0 - kurtosis)).sqrt();
                Ok(PearsonMember::TypeII {
                    half_width,
                    beta: new_beta(alpha, alpha)?,
                })
            } else {
                // Student t with the degrees of freedom matching κ.
                let nu = 4.0 + 6.0 / (kurtosis - 3.0);
                let scale = ((nu - 2.0) / nu).sqrt();
                let student = StudentT::new(nu).map_err(|e| {
                    Error::InvalidInput(format!("student-t({nu}): {e}"))
                })?;
                Ok(PearsonMember::TypeVII { scale, student })
            };
        }

        let gamma1 = skewness;
        let b0 = 4.0 * kurtosis - 3.0 * b1;
        let bb1 = gamma1 * (kurtosis + 3.0);
        let b2 = 2.0 * kurtosis - 3.0 * b1 - 6.0;
        let d = 10.0 * kurtosis - 12.0 * b1 - 18.0;
        debug_assert!(b0 > 0.0);

        if b2.abs() <= 1e-9 * (b0.abs() + bb1.abs() + 1.0) {
            // Gamma limit between the bounded and heavy-tailed regimes.
            let shape = 4.0 / b1;
            let scale = gamma1 / 2.0;
            return Ok(PearsonMember::TypeIII {
                shape,
                scale,
                gamma: new_gamma(shape)?,
            });
        }

        let selector = bb1 * bb1 / (4.0 * b0 * b2);
        let n_at = |x: f64| bb1 + d * x;
        if selector < 0.0 {
            // Real roots of opposite signs: bounded support between them.
            let (r1, r2) = quadratic_roots(b2, bb1, b0);
            let span = r2 - r1;
            let a_exp = n_at(r1) / (b2 * span);
            let b_exp = -n_at(r2) / (b2 * span);
            Ok(PearsonMember::TypeI {
                left: r1,
                width: span,
                beta: new_beta(a_exp + 1.0, b_exp + 1.0)?,
            })
        } else if (selector - 1.0).abs() <= 1e-9 {
            // Double root: inverse-gamma tail off one side of it.
            let root = -bb1 / (2.0 * b2);
            let c = n_at(root) / b2;
            let shape = d / b2 - 1.0;
            Ok(PearsonMember::TypeV {
                root,
                side: -c.signum(),
                scale: c.abs(),
                gamma: new_gamma(shape)?,
            })
        } else if selector < 1.0 {
            // No real roots: the unbounded skewed regime.
            let lambda = -bb1 / (2.0 * b2);
            let alpha_sq = b0 / b2 - bb1 * bb1 / (4.0 * b2 * b2);
            let m = d / (2.0 * b2);
            debug_assert!(alpha_sq > 0.0);
            debug_assert!(m > 2.5 - 1e-9, "fourth moment requires m > 2.5");
            let alpha = alpha_sq.sqrt();
            let nu = n_at(lambda) / (b2 * alpha);
            Ok(PearsonMember::TypeIV(TypeIv::new(lambda, alpha, m, nu)))
        } else {
            // Real roots on one side of zero: support beyond them.
            let (r1, r2) = quadratic_roots(b2, bb1, b0);
            let span = r2 - r1;
            let a_exp = n_at(r1) / (b2 * span);
            let b_exp = -n_at(r2) / (b2 * span);
            let tail = -a_exp - b_exp - 1.0;
            let (anchor, side, near_exp) = if gamma1 > 0.0 {
                (r2, 1.0, b_exp) // both roots negative: mass to their right
            } else {
                (r1, -1.0, a_exp) // both roots positive: mass to their left
            };
            if near_exp <= -1.0 || tail <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "no integrable support side for skewness {skewness}, kurtosis {kurtosis}"
                )));
            }
            Ok(PearsonMember::TypeVI {
                anchor,
                width: span,
                side,
                numerator: new_gamma(near_exp + 1.0)?,
                denominator: new_gamma(tail)?,
            })
        }
    }

    /// Draw one standardized value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PearsonMember::Normal => rng.sample(StandardNormal),
            PearsonMember::TypeI { left, width, beta } => left + width * beta.sample(rng),
            PearsonMember::TypeII { half_width, beta } => {
                half_width * (2.0 * beta.sample(rng) - 1.0)
            }
            PearsonMember::TypeIII {
                shape,
                scale,
                gamma,
            } => scale * (gamma.sample(rng) - shape),
            PearsonMember::TypeIV(t) => t.sample(rng),
            PearsonMember::TypeV {
                root,
                side,
                scale,
                gamma,
            } => root + side * scale / gamma.sample(rng),
            PearsonMember::TypeVI {
                anchor,
                width,
                side,
                numerator,
                denominator,
            } => anchor + side * width * numerator.sample(rng) / denominator.sample(rng),
            PearsonMember::TypeVII { scale, student } => scale * student.sample(rng),
        }
    }

    /// Short name of the selected type, for reporting.
    pub fn type_name(&self) -> &'static str {
        match self {
            PearsonMember::Normal => "normal",
            PearsonMember::TypeI { .. } => "I",
            PearsonMember::TypeII { .. } => "II",
            PearsonMember::TypeIII { .. } => "III",
            PearsonMember::TypeIV(_) => "IV",
            PearsonMember::TypeV { .. } => "V",
            PearsonMember::TypeVI { .. } => "VI",
            PearsonMember::TypeVII { .. } => "VII",
        }
    }
}

fn new_beta(a: f64, b: f64) -> Result<Beta<f64>> {
    Beta::new(a, b).map_err(|e| Error::InvalidInput(format!("beta({a}, {b}): {e}")))
}

fn new_gamma(shape: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, 1.0).map_err(|e| Error::InvalidInput(format!("gamma({shape}): {e}")))
}

/// Roots of `a x² + b x + c`, ordered ascending, via the cancellation-free
/// quadratic formula (caller guarantees a real, separated pair).
fn quadratic_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (x1, x2) = (q / a, c / q);
    if x1 <= x2 {
        (x1, x2)
    } else {
        (x2, x1)
    }
}

/// Type IV sampler: the angle substitution `x = λ + α tan φ` turns the
/// density into `cos^(2m-2)(φ) · exp(-ν φ)` on `(-π/2, π/2)`, whose log is
/// strictly concave. A three-piece upper envelope — tangent lines taken at
/// the midpoints between the mode and either endpoint, and a flat cap at
/// the mode — yields an exact rejection sampler with piecewise-exponential
/// proposals.
#[derive(Debug, Clone)]
pub struct TypeIv {
    lambda: f64,
    alpha: f64,
    /// Cosine exponent `2m - 2`.
    cos_exp: f64,
    nu: f64,
    /// Peak log-density, subtracted so the working log-density is ≤ 0.
    peak: f64,
    phi_left: f64,
    phi_right: f64,
    g_left: f64,
    g_right: f64,
    slope_left: f64,
    slope_right: f64,
    w_left: f64,
    w_mid: f64,
    w_right: f64,
}

impl TypeIv {
    fn new(lambda: f64, alpha: f64, m: f64, nu: f64) -> TypeIv {
        let cos_exp = 2.0 * m - 2.0;
        let h = |phi: f64| cos_exp * phi.cos().ln() - nu * phi;
        let phi_mode = (-nu / cos_exp).atan();
        let peak = h(phi_mode);
        let phi_left = 0.5 * (phi_mode - FRAC_PI_2);
        let phi_right = 0.5 * (phi_mode + FRAC_PI_2);
        let g_left = h(phi_left) - peak;
        let g_right = h(phi_right) - peak;
        let slope = |phi: f64| -cos_exp * phi.tan() - nu;
        let slope_left = slope(phi_left); // > 0: left of the mode
        let slope_right = slope(phi_right); // < 0: right of the mode
        let len_left = phi_left + FRAC_PI_2;
        let len_right = FRAC_PI_2 - phi_right;
        // ∫ exp(tangent) over each outer piece; exp_m1 keeps small slopes stable.
        let w_left = g_left.exp() * (-(-slope_left * len_left).exp_m1()) / slope_left;
        let w_mid = phi_right - phi_left;
        let w_right = g_right.exp() * (slope_right * len_right).exp_m1() / slope_right;
        TypeIv {
            lambda,
            alpha,
            cos_exp,
            nu,
            peak,
            phi_left,
            phi_right,
            g_left,
            g_right,
            slope_left,
            slope_right,
            w_left,
            w_mid,
            w_right,
        }
    }

    fn log_density(&self, phi: f64) -> f64 {
        self.cos_exp * phi.cos().ln() - self.nu * phi - self.peak
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.w_left + self.w_mid + self.w_right;
        loop {
            let pick = rng.random::<f64>() * total;
            let v = rng.random::<f64>();
            // Invert each piece's normalized exponential CDF; all the
            // intermediate quantities live in [0, 1], so nothing overflows.
            let (phi, envelope) = if pick < self.w_left {
                let s = self.slope_left;
                let len = self.phi_left + FRAC_PI_2;
                let base = (-s * len).exp();
                let phi = self.phi_left + (base + v * -((-s * len).exp_m1())).ln() / s;
                (phi, self.g_left + s * (phi - self.phi_left))
            } else if pick < self.w_left + self.w_mid {
                let phi = self.phi_left + v * self.w_mid;
                (phi, 0.0)
            } else {
                let s = self.slope_right;
                let len = FRAC_PI_2 - self.phi_right;
                let phi = self.phi_right + (1.0 + v * (s * len).exp_m1()).ln() / s;
                (phi, self.g_right + s * (phi - self.phi_right))
            };
            if phi <= -FRAC_PI_2 || phi >= FRAC_PI_2 {
                continue; // endpoint roundoff
            }
            if rng.random::<f64>().ln() <= self.log_density(phi) - envelope {
                return self.lambda + self.alpha * phi.tan();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn moments(values: &[f64]) -> (f64, f64, f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let central = |k: u32| values.iter().map(|v| (v - mean).powi(k as i32)).sum::<f64>() / n;
        let m2 = central(2);
        let sd = m2.sqrt();
        (mean, sd, central(3) / (m2 * sd), central(4) / (m2 * m2))
    }

    /// Monte Carlo moment check with a batch-means error estimate: split
    /// the draws into batches, compute each statistic per batch, and use
    /// the spread of batch values to scale the tolerance.
    fn assert_moments_match(member: &PearsonMember, skew: f64, kurt: f64, label: &str) {
        let mut rng = substream(2024, "pearson-moments", 0);
        let batches = 50;
        let per_batch = 4000;
        let mut stats = Vec::with_capacity(batches);
        for _ in 0..batches {
            let values: Vec<f64> = (0..per_batch).map(|_| member.sample(&mut rng)).collect();
            stats.push(moments(&values));
        }
        let agg = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| {
            let vals: Vec<f64> = stats.iter().map(f).collect();
            let mean = vals.iter().sum::<f64>() / batches as f64;
            let var =
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
            (mean, (var / batches as f64).sqrt())
        };
        for (name, target, value) in [
            ("mean", 0.0, agg(&|s| s.0)),
            ("sd", 1.0, agg(&|s| s.1)),
            ("skewness", skew, agg(&|s| s.2)),
            ("kurtosis", kurt, agg(&|s| s.3)),
        ] {
            let (estimate, se) = value;
            // Batch statistics of size 4000 carry an O(1/batch) small-sample
            // bias for skewness/kurtosis; allow it alongside the MC error.
            let tolerance = 6.0 * se + 0.02 * (1.0 + target.abs());
            assert!(
                (estimate - target).abs() <= tolerance,
                "{label}: {name} {estimate} vs {target} (se {se})"
            );
        }
    }

    #[test]
    fn classification_covers_every_type() {
        let cases = [
            (0.0, 3.0, "normal"),
            (0.0, 2.2, "II"),
            (0.0, 4.5, "VII"),
            (0.8, 3.2, "I"),
            (1.0, 4.5, "III"), // κ = 3 + 3γ²/2 exactly
            (0.5, 4.0, "IV"),
            (1.0, (174.0 + 18000.0_f64.sqrt()) / 62.0, "V"), // selector = 1 exactly
            (2.0, 10.0, "VI"),
        ];
        for (skew, kurt, expected) in cases {
            let member = PearsonMember::classify(skew, kurt).unwrap();
            assert_eq!(member.type_name(), expected, "({skew}, {kurt})");
        }
    }

    #[test]
    fn moments_match_across_the_plane() {
        let cases = [
            (0.0, 3.0),
            (0.0, 2.2),
            (0.0, 4.5),
            (0.8, 3.2),
            (-0.8, 3.2),
            (1.0, 4.5),
            (0.5, 4.0),
            (-0.5, 4.0),
            (1.0, (174.0 + 18000.0_f64.sqrt()) / 62.0),
            (2.0, 10.0),
            (-2.0, 10.0),
        ];
        for (skew, kurt) in cases {
            let member = PearsonMember::classify(skew, kurt).unwrap();
            assert_moments_match(&member, skew, kurt, member.type_name());
        }
    }

    #[test]
    fn infeasible_and_boundary_moments_are_rejected() {
        // Strictly below the bound: impossible for any distribution.
        assert!(matches!(
            PearsonMember::classify(1.0, 1.5),
            Err(Error::InfeasibleMoments { .. })
        ));
        // Exactly on the bound: only a two-point law matches.
        assert!(matches!(
            PearsonMember::classify(0.0, 1.0),
            Err(Error::InfeasibleMoments { .. })
        ));
        // Within tolerance of the bound.
        assert!(matches!(
            PearsonMember::classify(0.5, 1.25 + 5e-10),
            Err(Error::InfeasibleMoments { .. })
        ));
        // Just above the tolerance band is accepted.
        assert!(PearsonMember::classify(0.0, 1.0 + 1e-6).is_ok());
    }

    #[test]
    fn uniform_case_matches_the_rectangular_law() {
        // κ = 1.8 gives the uniform distribution on [-√3, √3]; check the
        // empirical CDF against it with a Kolmogorov-Smirnov bound.
        let member = PearsonMember::classify(0.0, 1.8).unwrap();
        let mut rng = substream(5, "pearson-uniform", 0);
        let n = 20_000;
        let mut values: Vec<f64> = (0..n).map(|_| member.sample(&mut rng)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let half = 3.0_f64.sqrt();
        let mut d = 0.0_f64;
        for (i, v) in values.iter().enumerate() {
            let f = ((v + half) / (2.0 * half)).clamp(0.0, 1.0);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((f - lo).abs()).max((hi - f).abs());
        }
        // 1% critical value for the one-sample statistic.
        assert!(d <= 1.63 / (n as f64).sqrt(), "KS statistic {d}");
        assert!(values.first().unwrap() >= &-half);
        assert!(values.last().unwrap() <= &half);
    }

    #[test]
    fn gamma_case_matches_a_closed_form_probability() {
        // γ = 1 selects the gamma member with shape 4: the standardized
        // variable is (G - 4)/2, so P(X ≤ 0) = P(G ≤ 4), computable from
        // the Erlang CDF: 1 - e^{-4} Σ_{k<4} 4^k/k!.
        let member = PearsonMember::classify(1.0, 4.5).unwrap();
        assert_eq!(member.type_name(), "III");
        let expected = 1.0 - (-4.0_f64).exp() * (1.0 + 4.0 + 8.0 + 64.0 / 6.0);
        let mut rng = substream(6, "pearson-gamma", 0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| member.sample(&mut rng) <= 0.0)
            .count();
        let p = hits as f64 / n as f64;
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((p - expected).abs() <= 4.0 * se, "{p} vs {expected}");
    }

    #[test]
    fn symmetric_types_balance_their_tails() {
        for kurt in [2.2, 4.5] {
            let member = PearsonMember::classify(0.0, kurt).unwrap();
            let mut rng = substream(7, "pearson-symmetry", 0);
            let n = 50_000;
            let positive = (0..n)
                .filter(|_| member.sample(&mut rng) > 0.0)
                .count() as f64;
            let se = 0.5 / (n as f64).sqrt();
            assert!((positive / n as f64 - 0.5).abs() <= 5.0 * se);
        }
    }

    #[test]
    fn type_vi_supports_lie_beyond_the_near_root() {
        let member = PearsonMember::classify(2.0, 10.0).unwrap();
        let PearsonMember::TypeVI { anchor, side, .. } = &member else {
            panic!("expected type VI");
        };
        assert!(*side > 0.0, "positive skew puts the mass rightward");
        let mut rng = substream(8, "pearson-typevi", 0);
        for _ in 0..10_000 {
            assert!(member.sample(&mut rng) >= *anchor);
        }
    }
}
