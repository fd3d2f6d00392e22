//! Kraus channels, Choi–Jamiołkowski conversions, teleportation unitaries
//! and a small zoo of standard channels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, herm_eig, hermitize, identity, kron, CMatrix, CVector};
use crate::states::{max_entangled, ChoiMatrix, DensityOperator};

pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-9;

/// A CPTP map in Kraus form: E(ρ) = Σ_k A_k ρ A_k† with Σ_k A_k†A_k = I.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus_ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(d_in: usize, d_out: usize, kraus_ops: Vec<CMatrix>) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for op in &kraus_ops {
            if op.nrows() != d_out || op.ncols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        let mut sum = CMatrix::zeros(d_in, d_in);
        for op in &kraus_ops {
            sum += op.adjoint() * op;
        }
        let dev = linalg::frobenius_norm(&(sum - identity(d_in)));
        if dev > KRAUS_COMPLETENESS_TOL {
            return Err(Error::KrausIncomplete { max_dev: dev });
        }
        Ok(Self { d_in, d_out, kraus_ops })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    /// Channel action on a raw operator (linear extension).
    pub fn apply_raw(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.d_in || m.ncols() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input must be {0}x{0}",
                self.d_in
            )));
        }
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for op in &self.kraus_ops {
            out += op * m * op.adjoint();
        }
        Ok(out)
    }
}

/// CPTP action on a state; the output trace is preserved within 1e-10.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = ch.apply_raw(rho.matrix())?;
    DensityOperator::new(hermitize(&out))
}

/// Choi matrix χ = (I ⊗ E)(Φ), reference subsystem first.
pub fn choi_from_kraus(ch: &KrausChannel) -> Result<ChoiMatrix> {
    let d = ch.d_in();
    let phi = max_entangled(d)?;
    let mut chi = CMatrix::zeros(d * ch.d_out(), d * ch.d_out());
    for op in ch.kraus_ops() {
        let w = linalg::kron(&identity(d), op) * &phi;
        chi += &w * w.adjoint();
    }
    ChoiMatrix::new(d, ch.d_out(), hermitize(&chi))
}

/// Kraus operators from a Choi matrix via its eigendecomposition;
/// eigenvalues at or below `cutoff` (relative to the largest) are dropped.
pub fn kraus_from_choi(chi: &ChoiMatrix, cutoff: f64) -> Result<KrausChannel> {
    let d_in = chi.d_in();
    let d_out = chi.d_out();
    let eig = herm_eig(chi.matrix())?;
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let mut ops = Vec::new();
    for k in 0..eig.eigenvalues.len() {
        let l = eig.eigenvalues[k];
        if l <= cutoff * lam_max || l <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let scale = (d_in as f64 * l).sqrt();
        // χ eigenvector v indexes (reference j, output b); the Kraus
        // operator is A[b,j] = √(d·λ) v[(j,b)].
        let mut a = CMatrix::zeros(d_out, d_in);
        for j in 0..d_in {
            for b in 0..d_out {
                a[(b, j)] = v[j * d_out + b] * c(scale, 0.0);
            }
        }
        ops.push(a);
    }
    KrausChannel::new(d_in, d_out, ops)
}

/// The d² Weyl–Heisenberg unitaries X^a Z^b, ordered with the Z power
/// outermost so that d = 2 yields {I, X, Z, XZ}.
pub fn weyl_heisenberg(d: usize) -> Result<Vec<CMatrix>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("Weyl-Heisenberg set needs d >= 2, got {d}")));
    }
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut shift = CMatrix::zeros(d, d); // X|j> = |j+1 mod d>
    let mut clock = CMatrix::zeros(d, d); // Z|j> = ω^j |j>
    for j in 0..d {
        shift[((j + 1) % d, j)] = c(1.0, 0.0);
        clock[(j, j)] = Complex64::from_polar(1.0, omega * j as f64);
    }
    let mut out = Vec::with_capacity(d * d);
    let mut zb = identity(d);
    for _b in 0..d {
        let mut xa_zb = zb.clone();
        for _a in 0..d {
            out.push(xa_zb.clone());
            xa_zb = &shift * xa_zb;
        }
        zb = &clock * zb;
    }
    Ok(out)
}

/// Bell basis Φ_i = (1 ⊗ U_i)|Φ⟩ over the Weyl–Heisenberg set.
pub fn bell_basis(d: usize) -> Result<Vec<CVector>> {
    let phi = max_entangled(d)?;
    let us = weyl_heisenberg(d)?;
    Ok(us
        .iter()
        .map(|u| kron(&identity(d), u) * &phi)
        .collect())
}

/// Identity channel on dimension d.
pub fn identity_channel(d: usize) -> Result<KrausChannel> {
    KrausChannel::new(d, d, vec![identity(d)])
}

/// Choi matrix of a unitary channel: the projector onto (1 ⊗ U)|Φ⟩.
pub fn unitary_choi(u: &CMatrix) -> Result<ChoiMatrix> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch("unitary must be square".into()));
    }
    if !linalg::is_unitary(u, 1e-10) {
        return Err(Error::InvalidArgument("matrix is not unitary".into()));
    }
    let d = u.nrows();
    let chi_u = kron(&identity(d), u) * max_entangled(d)?;
    ChoiMatrix::new(d, d, &chi_u * chi_u.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

fn pauli(axis: PauliAxis) -> CMatrix {
    match axis {
        PauliAxis::X => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

pub fn pauli_x() -> CMatrix {
    pauli(PauliAxis::X)
}
pub fn pauli_y() -> CMatrix {
    pauli(PauliAxis::Y)
}
pub fn pauli_z() -> CMatrix {
    pauli(PauliAxis::Z)
}

/// Unitary rotation channel R(θ) = e^{iθσ} about a Pauli axis.
pub fn rotation_unitary(theta: f64, axis: PauliAxis) -> Result<KrausChannel> {
    let u = rotation_matrix(theta, axis);
    KrausChannel::new(2, 2, vec![u])
}

/// R(θ) = e^{iθσ} = cos(θ) I + i sin(θ) σ.
pub fn rotation_matrix(theta: f64, axis: PauliAxis) -> CMatrix {
    identity(2).scale(theta.cos()) + pauli(axis).map(|z| z * c(0.0, theta.sin()))
}

/// Pauli channel Σ_i p_i U_i ρ U_i† over the Weyl–Heisenberg unitaries;
/// `probs` must have length d² and sum to one.
pub fn pauli_channel(probs: &[f64]) -> Result<KrausChannel> {
    let d2 = probs.len();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "Pauli channel needs d^2 probabilities, got {d2}"
        )));
    }
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidArgument("Pauli probabilities must lie in [0,1]".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("Pauli probabilities sum to {sum}")));
    }
    let us = weyl_heisenberg(d)?;
    let ops: Vec<CMatrix> = us
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(u, &p)| u.scale(p.sqrt()))
        .collect();
    KrausChannel::new(d, d, ops)
}

/// Depolarizing channel E(ρ) = (1-p)ρ + (p/d) Tr[ρ] I.
pub fn depolarizing(p: f64, d: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("depolarizing probability {p} outside [0,1]")));
    }
    let d2 = (d * d) as f64;
    let mut probs = vec![p / d2; d * d];
    probs[0] = 1.0 - p + p / d2;
    pauli_channel(&probs)
}

/// Amplitude damping channel with damping rate p.
pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("damping rate {p} outside [0,1]")));
    }
    let k0 = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c((1.0 - p).sqrt(), 0.)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(p.sqrt(), 0.), c(0., 0.), c(0., 0.)]);
    KrausChannel::new(2, 2, vec![k0, k1])
}
