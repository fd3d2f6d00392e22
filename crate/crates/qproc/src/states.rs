//! Quantum-state primitives: Hermitian operators, density operators, Choi
//! matrices, and the standard distance/overlap measures between states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, herm_deviation, herm_eig, hermitize, partial_trace, sqrt_psd, CMatrix, CVector,
    HERMITICITY_TOL,
};

/// A validated Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity within 1e-12 (absolute, entrywise) and
    /// stores the symmetrized matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch("Hermitian operator must be square".into()));
        }
        if !linalg::entries_finite(&matrix) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let dev = herm_deviation(&matrix);
        if !(dev <= HERMITICITY_TOL) {
            return Err(Error::NotHermitian { max_dev: dev });
        }
        Ok(Self { matrix: hermitize(&matrix) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eig(&self) -> linalg::HermEigDecomposition {
        herm_eig(&self.matrix).expect("validated Hermitian")
    }
}

pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

/// A density operator: Hermitian, PSD within -1e-10, unit trace within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix)?;
        let tr = linalg::trace(op.matrix());
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace is {tr}")));
        }
        let eig = op.eig();
        let min = eig.eigenvalues[eig.eigenvalues.len() - 1];
        if min < -PSD_TOL {
            return Err(Error::NotDensity(format!("smallest eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(linalg::identity(dim).scale(1.0 / dim as f64)).expect("I/d is a state")
    }

    /// Projector onto a (normalized) pure state.
    pub fn pure(v: &CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotDensity(format!("pure state norm {n}")));
        }
        let u = v.scale(1.0 / n);
        Self::new(&u * u.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.op
    }
}

/// Choi matrix of a channel: a density operator on reference ⊗ output
/// whose partial trace over the output is I/d_in.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    rho: DensityOperator,
}

pub const CHOI_TP_TOL: f64 = 1e-9;

impl ChoiMatrix {
    pub fn new(d_in: usize, d_out: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != d_in * d_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for {d_in}->{d_out} must have dimension {}",
                d_in * d_out
            )));
        }
        let rho = DensityOperator::new(matrix).map_err(|e| Error::NotChoi(e.to_string()))?;
        let marginal = partial_trace(rho.matrix(), &[d_in, d_out], &[0])?;
        let expect = linalg::identity(d_in).scale(1.0 / d_in as f64);
        let dev = linalg::frobenius_norm(&(marginal - expect));
        if dev > CHOI_TP_TOL {
            return Err(Error::NotChoi(format!(
                "partial trace over output deviates from I/d_in by {dev:.3e}"
            )));
        }
        Ok(Self { d_in, d_out, rho })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn dim(&self) -> usize {
        self.d_in * self.d_out
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn density(&self) -> &DensityOperator {
        &self.rho
    }
}

/// |Φ⟩ = d^{-1/2} Σ_i |i,i⟩ on d².
pub fn max_entangled(d: usize) -> Result<CVector> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let mut v = CVector::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = c(a, 0.0);
    }
    Ok(v)
}

/// Projector onto |Φ⟩.
pub fn max_entangled_projector(d: usize) -> Result<CMatrix> {
    let v = max_entangled(d)?;
    Ok(&v * v.adjoint())
}

/// Bures fidelity F(ρ,σ) = Tr √(√ρ σ √ρ), clamped to [0,1].
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch("fidelity of states with different dims".into()));
    }
    fidelity_raw(rho.matrix(), sigma.matrix())
}

/// Fidelity of two PSD matrices given as raw Hermitian data. Eigenvalues
/// of √ρ σ √ρ below 1e-13 of the largest are treated as rank-deficiency
/// noise: √ of spectrum-level noise would otherwise contaminate the sum
/// at the 1e-8 scale.
pub fn fidelity_raw(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let s = sqrt_psd(rho)?;
    let m = hermitize(&(&s * sigma * &s));
    let eig = herm_eig(&m)?;
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let thr = 1e-13 * lam_max;
    let f: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > thr)
        .map(|&l| l.sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Schatten p-norm of a Hermitian operator (p ≥ 1 or infinity).
pub fn schatten_p_norm(h: &HermitianOperator, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Schatten norm requires p >= 1, got {p}")));
    }
    let eig = herm_eig(h.matrix())?;
    if p.is_infinite() {
        return Ok(eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs())));
    }
    let sum: f64 = eig.eigenvalues.iter().map(|&l| l.abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Trace norm ‖O‖₁ = Σ|λ_i|.
pub fn trace_norm(h: &HermitianOperator) -> f64 {
    linalg::trace_norm(h.matrix()).expect("validated Hermitian")
}

/// Quantum relative entropy S(ρ||σ) in bits; +∞ when supp(ρ) ⊄ supp(σ).
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(
            "relative entropy of states with different dims".into(),
        ));
    }
    let eig_r = herm_eig(rho.matrix())?;
    let eig_s = herm_eig(sigma.matrix())?;
    let cutoff = 1e-12;

    // Weight of ρ on the kernel of σ decides the +∞ branch.
    let mut kernel_weight = 0.0;
    for k in 0..sigma.dim() {
        if eig_s.eigenvalues[k] <= cutoff {
            let v = eig_s.eigenvectors.column(k);
            let w: Complex64 = (v.adjoint() * rho.matrix() * v)[(0, 0)];
            kernel_weight += w.re;
        }
    }
    if kernel_weight > 1e-10 {
        return Ok(f64::INFINITY);
    }

    let mut s = 0.0;
    for k in 0..rho.dim() {
        let l = eig_r.eigenvalues[k];
        if l > cutoff {
            s += l * l.log2();
        }
    }
    for k in 0..sigma.dim() {
        let l = eig_s.eigenvalues[k];
        if l > cutoff {
            let v = eig_s.eigenvectors.column(k);
            let w: Complex64 = (v.adjoint() * rho.matrix() * v)[(0, 0)];
            s -= w.re * l.log2();
        }
    }
    Ok(s.max(0.0))
}
