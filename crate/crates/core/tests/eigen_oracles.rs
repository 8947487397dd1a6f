//! Independent verification of the eigenvalue engine: every reported
//! eigenvalue must be a root of the characteristic polynomial computed by
//! a different algorithm (the trace recurrence), and the spectrum must
//! respect the trace, determinant, and conjugate-closure identities.

use proptest::prelude::*;
use rand::Rng;
use stabens::linalg::eigenvalues;
use stabens::rng::substream;
use stabens::{Complex, RealMatrix};
use std::collections::HashMap;

/// Characteristic polynomial coefficients (ascending powers, monic) by the
/// trace recurrence M_k = A (M_{k-1} + c_{n-k+1} I), c_{n-k} = -tr(M_k)/k,
/// which never eigen-decomposes anything.
fn char_poly(a: &RealMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = RealMatrix::identity(n, n);
    for k in 1..=n {
        m = a * m;
        let ck = -m.trace() / k as f64;
        coeffs[n - k] = ck;
        for i in 0..n {
            m[(i, i)] += ck;
        }
    }
    coeffs
}

/// |p(z)| relative to the polynomial's own magnitude at |z|, so a residual
/// of 1e-8 means z is a root up to a tiny backward perturbation of the
/// coefficients.
fn relative_root_residual(coeffs: &[f64], z: Complex) -> f64 {
    let mut value = Complex::new(*coeffs.last().unwrap(), 0.0);
    for c in coeffs.iter().rev().skip(1) {
        value = value * z + Complex::new(*c, 0.0);
    }
    let zmag = z.norm().max(1.0);
    let mut scale = 0.0;
    let mut power = 1.0;
    for c in coeffs {
        scale += c.abs() * power;
        power *= zmag;
    }
    value.norm() / scale
}

fn seeded_matrix(index: u64) -> RealMatrix {
    let mut rng = substream(0xE16E, "eigen-oracle", index);
    let n = 1 + (index as usize % 8);
    RealMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0))
}

#[test]
fn eigenvalues_are_characteristic_roots_with_exact_sum_and_product() {
    for index in 0..1000u64 {
        let a = seeded_matrix(index);
        let spectrum = eigenvalues(&a).unwrap();
        assert_eq!(spectrum.order(), a.nrows());

        let coeffs = char_poly(&a);
        for &ev in spectrum.eigenvalues() {
            let residual = relative_root_residual(&coeffs, ev);
            assert!(
                residual <= 1e-8,
                "matrix {index}: eigenvalue {ev} has residual {residual}"
            );
        }

        let sum: Complex = spectrum.eigenvalues().iter().sum();
        let trace = a.trace();
        assert!(
            (sum.re - trace).abs() <= 1e-8 * trace.abs().max(1.0),
            "matrix {index}: trace {trace} vs eigenvalue sum {sum}"
        );
        assert!(sum.im.abs() <= 1e-12, "matrix {index}: trace imaginary {sum}");

        let product = spectrum
            .eigenvalues()
            .iter()
            .fold(Complex::new(1.0, 0.0), |acc, ev| acc * ev);
        let det = a.determinant();
        let scale = det.abs().max(product.norm()).max(1.0);
        assert!(
            (product.re - det).abs() <= 1e-8 * scale,
            "matrix {index}: determinant {det} vs eigenvalue product {product}"
        );
        assert!(product.im.abs() <= 1e-8 * scale);
    }
}

#[test]
fn complex_eigenvalues_appear_in_exact_conjugate_pairs() {
    for index in 0..1000u64 {
        let a = seeded_matrix(index);
        let spectrum = eigenvalues(&a).unwrap();
        let mut counts: HashMap<(u64, u64), i64> = HashMap::new();
        for ev in spectrum.eigenvalues() {
            if ev.im != 0.0 {
                *counts.entry((ev.re.to_bits(), ev.im.to_bits())).or_insert(0) += 1;
            }
        }
        for (&(re, im), &count) in &counts {
            let mirrored = counts
                .get(&(re, (-f64::from_bits(im)).to_bits()))
                .copied()
                .unwrap_or(0);
            assert_eq!(
                count,
                mirrored,
                "matrix {index}: unpaired complex eigenvalue {} + {}i",
                f64::from_bits(re),
                f64::from_bits(im)
            );
        }
    }
}

#[test]
fn zero_real_parts_do_not_count_as_stable() {
    let marginal = nalgebra::dmatrix![0.0, 0.0; 0.0, -1.0];
    assert!(!stabens::linalg::is_stable(&marginal).unwrap());
    let oscillator = nalgebra::dmatrix![0.0, 1.0; -1.0, 0.0];
    assert!(!stabens::linalg::is_stable(&oscillator).unwrap());
    // No tolerance band: a tiny negative leading eigenvalue counts as stable
    // as long as it is resolvable at the matrix's floating-point scale.
    let barely = nalgebra::dmatrix![-1e-12, 0.0; 0.0, -1.0];
    assert!(stabens::linalg::is_stable(&barely).unwrap());
    // The scalar path is exact, so even a denormal-adjacent margin counts.
    let scalar = RealMatrix::from_element(1, 1, -1e-300);
    assert!(stabens::linalg::is_stable(&scalar).unwrap());
}

fn square_matrix() -> impl Strategy<Value = RealMatrix> {
    (1usize..6).prop_flat_map(|n| {
        proptest::collection::vec(-5.0f64..5.0, n * n)
            .prop_map(move |entries| RealMatrix::from_vec(n, n, entries))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn leading_real_part_is_the_spectral_maximum(a in square_matrix()) {
        let spectrum = eigenvalues(&a).unwrap();
        let max_re = spectrum
            .eigenvalues()
            .iter()
            .map(|ev| ev.re)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(spectrum.leading_real_part(), max_re);
        prop_assert_eq!(spectrum.is_stable(), max_re < 0.0);
        prop_assert_eq!(spectrum.order(), a.nrows());
    }
}
