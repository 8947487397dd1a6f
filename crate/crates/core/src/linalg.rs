//! Dense real nonsymmetric eigenvalue computation and the stability
//! predicate.
//!
//! A matrix is *stable* when every eigenvalue has strictly negative real
//! part; a leading real part of exactly zero classifies as not stable. The
//! general path reduces the matrix to real Schur form; 1x1 and 2x2 inputs
//! take closed-form fast paths which agree with the general path to well
//! below [`CONJUGATE_TOL`] (covered by unit tests).

use crate::{Complex, Error, RealMatrix, Result};
use nalgebra::linalg::Schur;

/// Convergence tolerance handed to the Schur iteration.
pub const EIGEN_EPS: f64 = f64::EPSILON;

/// Iteration budget for the Schur reduction. Exceeding it is reported as
/// [`Error::EigenNonConvergence`], never as a silently wrong spectrum.
pub const EIGEN_MAX_ITER: usize = 100_000;

/// Absolute tolerance for pairing complex eigenvalues with their conjugates.
pub const CONJUGATE_TOL: f64 = 1e-10;

/// The spectrum of a real square matrix.
///
/// Holds all `n` eigenvalues counted with multiplicity. Complex eigenvalues
/// come in exact conjugate pairs (the constructor canonicalizes them), and
/// `leading_real_part` is the maximum real part over the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<Complex>,
    leading_real_part: f64,
}

impl Spectrum {
    fn new(eigenvalues: Vec<Complex>) -> Self {
        let leading_real_part = eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Spectrum {
            eigenvalues,
            leading_real_part,
        }
    }

    /// All eigenvalues, with multiplicity, in no particular order beyond
    /// being deterministic for a given input.
    pub fn eigenvalues(&self) -> &[Complex] {
        &self.eigenvalues
    }

    /// Maximum real part over the eigenvalues.
    pub fn leading_real_part(&self) -> f64 {
        self.leading_real_part
    }

    /// Number of eigenvalues (the matrix order).
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Whether every eigenvalue real part is strictly negative.
    pub fn is_stable(&self) -> bool {
        self.leading_real_part < 0.0
    }
}

/// Check that `m` is square, non-empty, and free of NaN/infinite entries.
pub fn validate(m: &RealMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    for col in 0..m.ncols() {
        for row in 0..m.nrows() {
            let value = m[(row, col)];
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry { row, col, value });
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a real square matrix.
///
/// Uses closed forms for orders 1 and 2 and the Schur reduction otherwise.
/// The returned spectrum always satisfies exact conjugate symmetry: near-real
/// eigenvalues are flattened onto the real axis and conjugate partners are
/// averaged, both within [`CONJUGATE_TOL`]; anything worse is an error.
pub fn eigenvalues(m: &RealMatrix) -> Result<Spectrum> {
    validate(m)?;
    match m.nrows() {
        1 => Ok(Spectrum::new(vec![Complex::new(m[(0, 0)], 0.0)])),
        2 => Ok(Spectrum::new(eig2(
            m[(0, 0)],
            m[(0, 1)],
            m[(1, 0)],
            m[(1, 1)],
        ))),
        n => {
            let schur = Schur::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
                .ok_or(Error::EigenNonConvergence { order: n })?;
            let raw: Vec<Complex> = schur.complex_eigenvalues().iter().copied().collect();
            Ok(Spectrum::new(symmetrize_conjugates(raw)?))
        }
    }
}

/// `true` iff all eigenvalue real parts are strictly negative.
pub fn is_stable(m: &RealMatrix) -> Result<bool> {
    Ok(eigenvalues(m)?.is_stable())
}

/// Closed-form eigenvalues of `[[a, b], [c, d]]`.
fn eig2(a: f64, b: f64, c: f64, d: f64) -> Vec<Complex> {
    let mean = 0.5 * (a + d);
    // discriminant/4 = ((a-d)/2)^2 + bc
    let quarter_disc = 0.25 * (a - d) * (a - d) + b * c;
    if quarter_disc >= 0.0 {
        let r = quarter_disc.sqrt();
        vec![Complex::new(mean - r, 0.0), Complex::new(mean + r, 0.0)]
    } else {
        let r = (-quarter_disc).sqrt();
        vec![Complex::new(mean, -r), Complex::new(mean, r)]
    }
}

/// Enforce exact conjugate symmetry on the spectrum of a real matrix.
///
/// Eigenvalues with `|Im| <= CONJUGATE_TOL * scale` are flattened to the real
/// axis; the remaining ones are matched into pairs whose real parts and
/// opposing imaginary parts must agree within the same tolerance, and each
/// pair is replaced by its exact conjugate average. An unmatched complex
/// eigenvalue means the upstream solver produced an inconsistent spectrum,
/// which is reported rather than repaired.
fn symmetrize_conjugates(mut eig: Vec<Complex>) -> Result<Vec<Complex>> {
    let scale = eig
        .iter()
        .map(|z| z.norm())
        .fold(1.0_f64, f64::max);
    let tol = CONJUGATE_TOL * scale;

    let mut out = Vec::with_capacity(eig.len());
    // Real Schur form emits complex pairs adjacently, so a linear matching
    // pass is enough; searching the remainder keeps this robust to ordering.
    while let Some(z) = eig.pop() {
        if z.im.abs() <= tol {
            out.push(Complex::new(z.re, 0.0));
            continue;
        }
        let partner = eig
            .iter()
            .position(|w| (w.re - z.re).abs() <= tol && (w.im + z.im).abs() <= tol)
            .ok_or(Error::ConjugateAsymmetry { re: z.re, im: z.im })?;
        let w = eig.swap_remove(partner);
        let re = 0.5 * (z.re + w.re);
        let im = 0.5 * (z.im.abs() + w.im.abs());
        out.push(Complex::new(re, im));
        out.push(Complex::new(re, -im));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use rand::Rng;

    /// The general path, forced, so fast paths can be cross-checked.
    fn eigenvalues_schur(m: &RealMatrix) -> Vec<Complex> {
        let schur = Schur::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).unwrap();
        symmetrize_conjugates(schur.complex_eigenvalues().iter().copied().collect()).unwrap()
    }

    fn sorted(mut v: Vec<Complex>) -> Vec<Complex> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn diagonal_matrix() {
        let s = eigenvalues(&dmatrix![-1.0, 0.0; 0.0, -2.0]).unwrap();
        let eig = sorted(s.eigenvalues().to_vec());
        assert_eq!(eig, vec![Complex::new(-2.0, 0.0), Complex::new(-1.0, 0.0)]);
        assert_eq!(s.leading_real_part(), -1.0);
    }

    #[test]
    fn toy_form_closed_roots() {
        // [[-1, a], [b, -1]] with a=1, b=0.25 has roots -1 +/- 0.5.
        let s = eigenvalues(&dmatrix![-1.0, 1.0; 0.25, -1.0]).unwrap();
        let eig = sorted(s.eigenvalues().to_vec());
        assert!((eig[0].re + 1.5).abs() < 1e-14 && eig[0].im == 0.0);
        assert!((eig[1].re + 0.5).abs() < 1e-14 && eig[1].im == 0.0);
    }

    #[test]
    fn stability_examples() {
        // ab = 2 > 1: unstable.
        assert!(!is_stable(&dmatrix![-1.0, 2.0; 1.0, -1.0]).unwrap());
        // a = 0: both eigenvalues -1.
        assert!(is_stable(&dmatrix![-1.0, 0.0; 17.0, -1.0]).unwrap());
        // ab = -12 < 0: complex pair with real part -1.
        assert!(is_stable(&dmatrix![-1.0, -3.0; 4.0, -1.0]).unwrap());
        // Leading real part exactly zero is NOT stable.
        assert!(!is_stable(&dmatrix![0.0, 0.0; 0.0, -1.0]).unwrap());
    }

    #[test]
    fn conjugate_pairs_are_exact() {
        let m = dmatrix![
            0.0, 1.0, 0.0;
            -1.0, 0.0, 0.0;
            0.0, 0.0, -3.0
        ];
        let s = eigenvalues(&m).unwrap();
        let mut ims: Vec<f64> = s.eigenvalues().iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(ims[0], -ims[2], "imaginary parts must be exact negatives");
        assert_eq!(ims[1], 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            eigenvalues(&RealMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            eigenvalues(&dmatrix![1.0, f64::NAN; 0.0, 1.0]),
            Err(Error::NonFiniteEntry { .. })
        ));
        assert!(matches!(
            eigenvalues(&RealMatrix::zeros(0, 0)),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn closed_form_2x2_agrees_with_schur_path() {
        let mut rng = crate::rng::substream(11, "linalg-2x2-agreement", 0);
        for _ in 0..500 {
            let m = RealMatrix::from_fn(2, 2, |_, _| rng.random_range(-5.0..5.0));
            let fast = sorted(eigenvalues(&m).unwrap().eigenvalues().to_vec());
            let general = sorted(eigenvalues_schur(&m));
            for (f, g) in fast.iter().zip(&general) {
                assert!(
                    (f - g).norm() < 1e-10,
                    "2x2 fast path disagrees with Schur: {f} vs {g} for {m}"
                );
            }
        }
    }
}
