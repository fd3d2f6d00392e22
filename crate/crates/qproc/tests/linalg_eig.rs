//! Stress tests for the Hermitian eigensolver on degenerate and
//! rank-deficient spectra at the sizes the processor maps produce.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qproc::linalg::{frobenius_norm, herm_eig, hermitize};
use qproc::random::SeededRng;

type CM = DMatrix<Complex64>;

fn check(h: &CM, label: &str) {
    let eig = herm_eig(h).unwrap();
    let rec = eig.reconstruct();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, &l| m.max(l.abs()));
    let err = frobenius_norm(&(rec - h));
    assert!(err <= 1e-10 * scale.max(1.0), "{label}: reconstruction err {err:.3e}");
    let gram = eig.eigenvectors.adjoint() * &eig.eigenvectors;
    let id = CM::identity(h.nrows(), h.nrows());
    let gerr = frobenius_norm(&(gram - id));
    assert!(gerr <= 1e-10, "{label}: gram err {gerr:.3e}");
    for w in eig.eigenvalues.as_slice().windows(2) {
        assert!(w[0] >= w[1], "{label}: not descending");
    }
}

#[test]
fn degenerate_kron_projectors() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut phi = nalgebra::DVector::<Complex64>::zeros(4);
    phi[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    phi[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let proj: CM = &phi * phi.adjoint();
    let mut p = proj.clone();
    for k in 0..2 {
        p = p.kronecker(&proj);
        check(&p, &format!("kron power {}", k + 2));
    }
}

#[test]
fn random_hermitian_various_sizes() {
    let mut rng = SeededRng::new(2024);
    for n in [1usize, 2, 3, 5, 8, 16, 33, 64] {
        let h = rng.hermitian(n);
        check(&h, &format!("random {n}"));
    }
}

#[test]
fn structured_cases() {
    let n = 24;
    check(&CM::identity(n, n), "identity");
    check(&CM::zeros(n, n), "zero");
    let mut rng = SeededRng::new(7);
    // Rank-deficient PSD with clustered spectrum.
    let g = rng.ginibre(n, 3);
    let h = hermitize(&(&g * g.adjoint()));
    check(&h, "rank 3 PSD");
    // Diagonal with repeated entries.
    let d = CM::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new((i % 3) as f64, 0.0)
        } else {
            Complex64::default()
        }
    });
    check(&d, "repeated diagonal");
    // 256-dim degenerate case of the size the processors use.
    let g = rng.ginibre(256, 8);
    let h = hermitize(&(&g * g.adjoint()));
    check(&h, "256-dim rank 8");
}
