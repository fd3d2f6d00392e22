//! Property tests for the state/channel layer: classical inequalities
//! between the distance measures, norm monotonicity, and channel
//! representation round-trips.

use proptest::prelude::*;
use qproc::channels::{apply_channel, choi_from_kraus, kraus_from_choi};
use qproc::linalg::{frobenius_norm, hermitize, trace_norm};
use qproc::random::SeededRng;
use qproc::states::{
    fidelity, relative_entropy, schatten_p_norm, HermitianOperator,
};

#[test]
fn fuchs_van_de_graaf() {
    // ‖ρ−σ‖₁ ≤ 2√(1−F²) on random pairs.
    let mut rng = SeededRng::new(1001);
    for d in [2usize, 4] {
        for _ in 0..50 {
            let rho = rng.density(d);
            let sigma = rng.density(d);
            let t = trace_norm(&(rho.matrix() - sigma.matrix())).unwrap();
            let f = fidelity(&rho, &sigma).unwrap();
            let bound = 2.0 * (1.0 - f * f).max(0.0).sqrt();
            assert!(t <= bound + 1e-9, "d={d}: {t} > {bound}");
            // and the lower companion 2(1-F) ≤ ‖ρ−σ‖₁
            assert!(2.0 * (1.0 - f) <= t + 1e-9);
        }
    }
}

#[test]
fn pinsker_inequality() {
    // ‖ρ−σ‖₁ ≤ √(2 ln2 · S) with S in bits, on full-rank pairs.
    let mut rng = SeededRng::new(1002);
    for d in [2usize, 4] {
        for _ in 0..50 {
            let rho = rng.density(d);
            let sigma = rng.density(d);
            let t = trace_norm(&(rho.matrix() - sigma.matrix())).unwrap();
            let s = relative_entropy(&rho, &sigma)
                .unwrap()
                .min(relative_entropy(&sigma, &rho).unwrap());
            assert!(s.is_finite());
            let bound = (2.0 * std::f64::consts::LN_2 * s).sqrt();
            assert!(t <= bound + 1e-9, "d={d}: {t} > {bound}");
        }
    }
}

#[test]
fn kraus_choi_action_roundtrip() {
    // choi -> kraus -> same channel action on random states.
    let mut rng = SeededRng::new(1003);
    for _ in 0..5 {
        let ch = rng.channel(2, 3);
        let chi = choi_from_kraus(&ch).unwrap();
        let back = kraus_from_choi(&chi, 1e-12).unwrap();
        for _ in 0..20 {
            let rho = rng.density(2);
            let a = apply_channel(&ch, &rho).unwrap();
            let b = apply_channel(&back, &rho).unwrap();
            assert!(frobenius_norm(&(a.matrix() - b.matrix())) < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schatten_monotone_in_p(seed in 0u64..10_000, p in 1.0f64..6.0, q in 0.0f64..6.0) {
        let q = p + q; // ensure q >= p
        let mut rng = SeededRng::new(seed);
        let h = HermitianOperator::new(hermitize(&rng.hermitian(4))).unwrap();
        let np = schatten_p_norm(&h, p).unwrap();
        let nq = schatten_p_norm(&h, q).unwrap();
        prop_assert!(nq <= np + 1e-10);
        let ninf = schatten_p_norm(&h, f64::INFINITY).unwrap();
        let n1 = schatten_p_norm(&h, 1.0).unwrap();
        prop_assert!(ninf <= nq + 1e-10);
        prop_assert!(np <= n1 + 1e-10);
    }

    #[test]
    fn generated_chois_satisfy_invariants(seed in 0u64..10_000) {
        // Every Choi from a random channel passes PSD and marginal checks
        // (the constructor enforces them).
        let mut rng = SeededRng::new(seed);
        let ch = rng.channel(2, 2);
        let chi = choi_from_kraus(&ch).unwrap();
        let marg = qproc::linalg::partial_trace(chi.matrix(), &[2, 2], &[0]).unwrap();
        let expect = qproc::linalg::identity(2).scale(0.5);
        prop_assert!(frobenius_norm(&(marg - expect)) < 1e-9);
    }
}
