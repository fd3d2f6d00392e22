//! Parametric-quantum-circuit processor: a cascade of conditional
//! two-qubit gates controlled by program registers, wrapped around a
//! Stinespring dilation so that arbitrary channels can be simulated.
//!
//! Subsystem layout: B ⊗ A ⊗ R₀ ⊗ R₁ ⊗ … ⊗ R_N, all qubits. B is the Choi
//! reference, A the system, R₀ the Stinespring register, R₁..R_N the gate
//! controls. The program state lives on (R₀, …, R_N).

use num_complex::Complex64;

use crate::channels::{pauli_x, pauli_y, pauli_z, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    c, embed, hermitize, identity, is_unitary, kron, unitary_exp, CMatrix, CVector,
};
use crate::processors::ProcessorMap;
use crate::states::{ChoiMatrix, HermitianOperator};

pub const PQC_DIM_LIMIT: usize = 1 << 13;

/// Generators, times and register data of a PQC processor.
pub struct PqcSpec {
    pub h0: HermitianOperator,
    pub h1: HermitianOperator,
    pub t0: f64,
    pub t1: f64,
    pub n_registers: usize,
    /// Pure state of the Stinespring register R₀.
    pub theta0: CVector,
    /// The conditional gate exp(i t₀H₀⊗|0⟩⟨0| + i t₁H₁⊗|1⟩⟨1|) on
    /// (A, R₀, R_j); identical for every register j.
    conditional_gate: CMatrix,
    /// Optional exponents of a reference product decomposition.
    pub binary_powers: Option<Vec<u32>>,
}

impl PqcSpec {
    pub fn new(
        h0: HermitianOperator,
        h1: HermitianOperator,
        t0: f64,
        t1: f64,
        n_registers: usize,
        theta0: CVector,
        binary_powers: Option<Vec<u32>>,
    ) -> Result<Self> {
        if h0.dim() != 4 || h1.dim() != 4 {
            return Err(Error::DimensionMismatch(
                "PQC generators must be two-qubit (4x4) operators".into(),
            ));
        }
        if n_registers < 1 {
            return Err(Error::InvalidArgument("PQC needs at least one register".into()));
        }
        if theta0.len() != 2 || (theta0.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("theta0 must be a normalized qubit state".into()));
        }
        let conditional_gate = conditional_gate(&h0, &h1, t0, t1)?;
        Ok(Self { h0, h1, t0, t1, n_registers, theta0, conditional_gate, binary_powers })
    }

    pub fn conditional_gate(&self) -> &CMatrix {
        &self.conditional_gate
    }

    /// One gate per register, as applied in circuit order.
    pub fn conditional_gates(&self) -> Vec<CMatrix> {
        vec![self.conditional_gate.clone(); self.n_registers]
    }

    pub fn with_registers(mut self, n_registers: usize) -> Result<Self> {
        if n_registers < 1 {
            return Err(Error::InvalidArgument("PQC needs at least one register".into()));
        }
        self.n_registers = n_registers;
        Ok(self)
    }

    pub fn program_dim(&self) -> usize {
        1 << (self.n_registers + 1)
    }
}

/// exp(i t₀ H₀ ⊗ |0⟩⟨0| + i t₁ H₁ ⊗ |1⟩⟨1|) on (A, R₀) ⊗ R_j. Validated
/// to be unitary and block-diagonal with blocks e^{it₀H₀}, e^{it₁H₁}.
fn conditional_gate(
    h0: &HermitianOperator,
    h1: &HermitianOperator,
    t0: f64,
    t1: f64,
) -> Result<CMatrix> {
    let p0 = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
    let p1 = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    let gen = kron(&h0.matrix().scale(t0), &p0) + kron(&h1.matrix().scale(t1), &p1);
    let u = unitary_exp(&hermitize(&gen), 1.0)?;
    if !is_unitary(&u, 1e-10) {
        return Err(Error::NonConvergence("conditional gate is not unitary".into()));
    }
    // Block check: register |r⟩ selects e^{i t_r H_r}.
    let dims = [2usize, 2, 2];
    for (r, h, t) in [(0usize, h0, t0), (1, h1, t1)] {
        let block_expect = unitary_exp(h.matrix(), t)?;
        for ar in 0..4usize {
            for ar2 in 0..4usize {
                let got = u[(ar * 2 + r, ar2 * 2 + r)];
                let want = block_expect[(ar, ar2)];
                if (got - want).norm() > 1e-10 {
                    return Err(Error::NonConvergence(
                        "conditional gate lost its block structure".into(),
                    ));
                }
                let cross = u[(ar * 2 + r, ar2 * 2 + (1 - r))];
                if cross.norm() > 1e-10 {
                    return Err(Error::NonConvergence(
                        "conditional gate couples register states".into(),
                    ));
                }
            }
        }
    }
    let _ = dims;
    Ok(u)
}

/// The processor map Λ(π) = Tr_R[Û (Φ_BA ⊗ π) Û†] with
/// Û = (Û_N ⋯ Û_1) acting on A, R₀ and each control register in turn.
pub fn pqc_processor(spec: &PqcSpec) -> Result<ProcessorMap> {
    let n = spec.n_registers;
    let total_dim = 1usize << (n + 3);
    if total_dim > PQC_DIM_LIMIT {
        return Err(Error::DimensionLimit { required: total_dim, limit: PQC_DIM_LIMIT });
    }
    let dims = vec![2usize; n + 3];
    // Û_total = Û_N ⋯ Û_1 on [B, A, R₀, R₁..R_N]; gate j acts on (A, R₀, R_j).
    let mut u_total = identity(total_dim);
    for j in 1..=n {
        let placed = embed(spec.conditional_gate(), &[1, 2, 2 + j], &dims)?;
        u_total = placed * u_total;
    }

    // Kraus operators K_m = (1_{BA} ⊗ ⟨m|_R) Û (|Φ⟩_{BA} ⊗ 1_R).
    let reg_dim = 1usize << (n + 1);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut kraus = Vec::with_capacity(reg_dim);
    for m in 0..reg_dim {
        let mut k = CMatrix::zeros(4, reg_dim);
        for ba in 0..4usize {
            for rcol in 0..reg_dim {
                let mut acc = Complex64::default();
                for j in 0..2usize {
                    // |Φ⟩ weight on (b', a') = (j, j).
                    acc += u_total[(ba * reg_dim + m, (j * 2 + j) * reg_dim + rcol)];
                }
                k[(ba, rcol)] = acc * c(inv_sqrt2, 0.0);
            }
        }
        kraus.push(k);
    }
    Ok(ProcessorMap::from_kraus(
        format!("pqc(N={n})"),
        reg_dim,
        2,
        2,
        kraus,
    ))
}

/// Amplitude-damping Stinespring generator
/// H_AD = (arcsin√p / 2)(Y⊗X − X⊗Y).
pub fn ad_hamiltonian(p: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("damping rate {p} outside [0,1]")));
    }
    let coeff = p.sqrt().asin() / 2.0;
    let g = kron(&pauli_y(), &pauli_x()) - kron(&pauli_x(), &pauli_y());
    HermitianOperator::new(g.scale(coeff))
}

/// U = e^{i H_AD}, the exact dilation unitary of amplitude damping.
pub fn ad_stinespring_unitary(p: f64) -> Result<CMatrix> {
    unitary_exp(ad_hamiltonian(p)?.matrix(), 1.0)
}

/// Choi matrix of ρ ↦ Tr_{R₀}[U (ρ ⊗ |θ₀⟩⟨θ₀|) U†] for a two-qubit U on
/// (A, R₀).
pub fn stinespring_choi(u: &CMatrix, theta0: &CVector) -> Result<ChoiMatrix> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::DimensionMismatch("Stinespring unitary must be 4x4".into()));
    }
    if theta0.len() != 2 {
        return Err(Error::DimensionMismatch("theta0 must be a qubit state".into()));
    }
    // Kraus A_e = (1 ⊗ ⟨e|) U (1 ⊗ |θ₀⟩).
    let mut ops = Vec::with_capacity(2);
    for e in 0..2usize {
        let mut a = CMatrix::zeros(2, 2);
        for i in 0..2usize {
            for ip in 0..2usize {
                let mut acc = Complex64::default();
                for r in 0..2usize {
                    acc += u[(i * 2 + e, ip * 2 + r)] * theta0[r];
                }
                a[(i, ip)] = acc;
            }
        }
        ops.push(a);
    }
    let ch = KrausChannel::new(2, 2, ops)?;
    crate::channels::choi_from_kraus(&ch)
}

/// The default universal gate pair: H₀ = √2 (Y⊗X − X⊗Y) (so U₀ has
/// α = √2) and H₁ = (√2 Z + √3 Y + √5 X) ⊗ (Y + √2 Z), with t₀ = t₁ = 1,
/// θ₀ = |0⟩ and four control registers. The gates are universal and do not
/// depend on the target damping rate; `p` is validated for range only.
pub fn pqc_ad_default(p: f64) -> Result<PqcSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("damping rate {p} outside [0,1]")));
    }
    let g = kron(&pauli_y(), &pauli_x()) - kron(&pauli_x(), &pauli_y());
    let h0 = HermitianOperator::new(g.scale(std::f64::consts::SQRT_2))?;
    let left = pauli_z().scale(2f64.sqrt()) + pauli_y().scale(3f64.sqrt()) + pauli_x().scale(5f64.sqrt());
    let right = pauli_y() + pauli_z().scale(2f64.sqrt());
    let h1 = HermitianOperator::new(kron(&left, &right))?;
    let mut theta0 = CVector::zeros(2);
    theta0[0] = c(1.0, 0.0);
    PqcSpec::new(h0, h1, 1.0, 1.0, 4, theta0, None)
}

/// Measurement-based evaluation for a program that is diagonal in the
/// computational basis of (R₀, …, R_N): each basis string (θ₀ = |b₀⟩,
/// controls b₁..b_N) contributes the Choi matrix of the composed dilation
/// U_{b_N} ⋯ U_{b_1} weighted by its probability.
pub fn mchan_choi(spec: &PqcSpec, diag_probs: &[f64]) -> Result<CMatrix> {
    let reg_dim = spec.program_dim();
    if diag_probs.len() != reg_dim {
        return Err(Error::DimensionMismatch(format!(
            "need {reg_dim} diagonal probabilities, got {}",
            diag_probs.len()
        )));
    }
    let u0 = unitary_exp(spec.h0.matrix(), spec.t0)?;
    let u1 = unitary_exp(spec.h1.matrix(), spec.t1)?;
    let n = spec.n_registers;
    let mut out = CMatrix::zeros(4, 4);
    for (b, &q) in diag_probs.iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        // Basis digits over [R₀, R₁..R_N], R₀ most significant.
        let mut u = identity(4);
        for j in 1..=n {
            let bit = (b >> (n - j)) & 1;
            let gate = if bit == 0 { &u0 } else { &u1 };
            u = gate * u;
        }
        let b0 = (b >> n) & 1;
        let mut theta = CVector::zeros(2);
        theta[b0] = c(1.0, 0.0);
        let chi = stinespring_choi(&u, &theta)?;
        out += chi.matrix().scale(q);
    }
    Ok(out)
}

/// Pure computational-basis program |θ₀⟩ ⊗ |b₁..b_N⟩ as a register index.
pub fn basis_program_index(spec: &PqcSpec, theta0_bit: usize, control_bits: &[usize]) -> Result<usize> {
    if control_bits.len() != spec.n_registers {
        return Err(Error::DimensionMismatch(format!(
            "need {} control bits",
            spec.n_registers
        )));
    }
    let mut idx = theta0_bit & 1;
    for &b in control_bits {
        idx = (idx << 1) | (b & 1);
    }
    Ok(idx)
}
