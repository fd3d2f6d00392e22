//! Oracle cross-checks for the processor maps: a protocol-level
//! state-vector simulation of port-based teleportation, and the explicit
//! dual formula of the teleportation processor for unitary targets.

use qproc::channels::{choi_from_kraus, identity_channel, rotation_matrix, weyl_heisenberg, PauliAxis};
use qproc::linalg::{
    apply_to_vector, c, frobenius_norm, hermitize, identity, kron, mat_func_psd, partial_trace,
    trace_norm, CMatrix, CVector,
};
use qproc::processors::{choi_power_program, pbt_processor, teleportation_processor, PbtSpec};
use qproc::states::{fidelity, max_entangled, max_entangled_projector, DensityOperator};

/// Entanglement-preserving simulation of two-port teleportation, built
/// directly from the protocol: share Φ-pairs, measure the POVM on
/// Alice's side plus the input half of Φ_DC, keep the selected port.
fn pbt_protocol_choi(n: usize) -> CMatrix {
    let d = 2usize;
    let spec = PbtSpec::new(n, d).unwrap();
    let dims = vec![d; 2 * n + 2]; // [D, C, A_1..A_n, B_1..B_n]
    let total: usize = dims.iter().product();

    // |ψ⟩ = |Φ_DC⟩ ⊗ Π_k |Φ_{A_k B_k}⟩ assembled entry by entry.
    let mut psi = CVector::zeros(total);
    let amp = (1.0 / (d as f64).powi(n as i32 + 1)).sqrt();
    let n_idx = 1usize << n;
    for dd in 0..d {
        for a in 0..n_idx {
            // digits of a are the A (= B) port contents
            let mut idx = dd;
            idx = idx * d + dd;
            for k in 0..n {
                idx = idx * d + ((a >> (n - 1 - k)) & 1);
            }
            for k in 0..n {
                idx = idx * d + ((a >> (n - 1 - k)) & 1);
            }
            psi[idx] = c(amp, 0.0);
        }
    }
    assert!((psi.norm() - 1.0).abs() < 1e-12);

    let mut povm_pos: Vec<usize> = (2..n + 2).collect();
    povm_pos.push(1);
    let mut chi = CMatrix::zeros(d * d, d * d);
    for (i, povm) in spec.povm.iter().enumerate() {
        let sqrt_povm = mat_func_psd(povm, |l| l.max(0.0).sqrt(), 1e-10).unwrap();
        let u = apply_to_vector(&sqrt_povm, &povm_pos, &dims, &psi).unwrap();
        let rho = &u * u.adjoint();
        chi += partial_trace(&rho, &dims, &[0, n + 2 + i]).unwrap();
    }
    hermitize(&chi)
}

#[test]
fn two_port_identity_simulation_matches_protocol() {
    let chi_protocol = pbt_protocol_choi(2);
    let phi = DensityOperator::new(max_entangled_projector(2).unwrap()).unwrap();
    let chi_rho = DensityOperator::new(chi_protocol.clone()).unwrap();
    // The pure state goes first: √Φ is exact, so no precision is lost to
    // the near-zero spectrum of the simulated Choi matrix.
    let f_oracle = fidelity(&phi, &chi_rho).unwrap();

    // The standard two-port value: F = (1+√3)/4, i.e. ⟨Φ|χ|Φ⟩ = (2+√3)/8.
    let expect = (1.0 + 3f64.sqrt()) / 4.0;
    assert!((f_oracle - expect).abs() < 1e-9, "oracle F = {f_oracle}");

    let p = pbt_processor(2, 2).unwrap();
    let chi_id = choi_from_kraus(&identity_channel(2).unwrap()).unwrap();
    let prog = choi_power_program(&chi_id, 2).unwrap();
    let out = p.apply(&prog).unwrap();
    assert!(frobenius_norm(&(out.matrix() - &chi_protocol)) < 1e-9);
    let f_map = fidelity(&phi, out.density()).unwrap();
    assert!((f_map - expect).abs() < 1e-9, "map F = {f_map}");
}

#[test]
fn three_port_protocol_agrees_with_map() {
    let chi_protocol = pbt_protocol_choi(3);
    let p = pbt_processor(3, 2).unwrap();
    let chi_id = choi_from_kraus(&identity_channel(2).unwrap()).unwrap();
    let prog = choi_power_program(&chi_id, 3).unwrap();
    let out = p.apply(&prog).unwrap();
    assert!(frobenius_norm(&(out.matrix() - &chi_protocol)) < 1e-9);
}

#[test]
fn teleport_dual_matches_conjugated_bell_mixture() {
    // Λ*[|χ_U⟩⟨χ_U|] = (1/d²) Σ_i (1⊗V_i)Φ(1⊗V_i)† with V_i = U_i U U_i†.
    let d = 2usize;
    let p = teleportation_processor(d).unwrap();
    let u = rotation_matrix(0.7, PauliAxis::X);
    let phi = max_entangled(d).unwrap();
    let chi_u = kron(&identity(d), &u) * &phi;
    let proj = &chi_u * chi_u.adjoint();
    let generic = hermitize(&p.dual_raw(&proj).unwrap());

    let mut direct = CMatrix::zeros(d * d, d * d);
    for ui in weyl_heisenberg(d).unwrap() {
        let v = &ui * &u * ui.adjoint();
        let w = kron(&identity(d), &v) * &phi;
        direct += (&w * w.adjoint()).scale(1.0 / (d * d) as f64);
    }
    assert!(frobenius_norm(&(generic - direct)) < 1e-10);
}

#[test]
fn pbt_identity_error_decreases_with_ports() {
    // C₁ of the Choi-program identity simulation improves with N.
    let chi_id = choi_from_kraus(&identity_channel(2).unwrap()).unwrap();
    let mut prev = f64::INFINITY;
    for n in 1..=3usize {
        let p = pbt_processor(n, 2).unwrap();
        let prog = choi_power_program(&chi_id, n).unwrap();
        let out = p.apply(&prog).unwrap();
        let c1 = trace_norm(&(out.matrix() - chi_id.matrix())).unwrap();
        assert!(c1 <= prev + 1e-12, "N={n}: {c1} > {prev}");
        prev = c1;
    }
}
