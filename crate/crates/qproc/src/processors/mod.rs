//! Programmable-processor maps Λ from program states to output Choi
//! matrices, together with their duals Λ*.
//!
//! Four designs are provided: the teleportation processor, port-based
//! teleportation (full program space and the reduced single-copy Choi
//! form), and the parametric-quantum-circuit processor.

mod pbt;
mod pqc;
mod teleport;

pub use pbt::{
    choi_power_program, pbt_processor, pbt_processor_with_limit, pbt_reduced_processor,
    pbt_reduced_processor_with_limit, symmetric_param_count, symmetrize_program, PbtSpec,
    DEFAULT_DIM_LIMIT,
};
pub use pqc::{
    ad_hamiltonian, ad_stinespring_unitary, basis_program_index, mchan_choi, pqc_ad_default,
    pqc_processor, stinespring_choi, PqcSpec,
};
pub use teleport::{teleportation_processor, TeleSpec};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitize, CMatrix};
use crate::states::{ChoiMatrix, DensityOperator};

/// How a processor map is applied internally.
enum Backend {
    /// Explicit Kraus operators from program space to Choi space.
    Kraus(Vec<CMatrix>),
    /// Port-based teleportation contraction operators, one per port.
    PbtStream(pbt::PbtStream),
}

/// A linear CPTP map Λ from program space to the Choi space of the
/// simulated channel, with its dual Λ*.
pub struct ProcessorMap {
    label: String,
    program_dim: usize,
    choi_d_in: usize,
    choi_d_out: usize,
    backend: Backend,
    materialized_kraus: OnceLock<Vec<CMatrix>>,
}

impl ProcessorMap {
    fn from_kraus(
        label: String,
        program_dim: usize,
        choi_d_in: usize,
        choi_d_out: usize,
        kraus: Vec<CMatrix>,
    ) -> Self {
        Self {
            label,
            program_dim,
            choi_d_in,
            choi_d_out,
            backend: Backend::Kraus(kraus),
            materialized_kraus: OnceLock::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn program_dim(&self) -> usize {
        self.program_dim
    }

    pub fn choi_d_in(&self) -> usize {
        self.choi_d_in
    }

    pub fn choi_d_out(&self) -> usize {
        self.choi_d_out
    }

    /// Dimension of the output Choi space.
    pub fn choi_dim(&self) -> usize {
        self.choi_d_in * self.choi_d_out
    }

    fn check_program_dims(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.program_dim || m.ncols() != self.program_dim {
            return Err(Error::DimensionMismatch(format!(
                "program operator is {}x{}, processor `{}` expects {2}x{2}",
                m.nrows(),
                self.label,
                self.program_dim
            )));
        }
        Ok(())
    }

    /// Λ applied to an arbitrary operator (linear extension beyond states).
    pub fn apply_raw(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_program_dims(m)?;
        match &self.backend {
            Backend::Kraus(ops) => {
                let dim = self.choi_dim();
                let mut out = CMatrix::zeros(dim, dim);
                for k in ops {
                    out += k * m * k.adjoint();
                }
                Ok(out)
            }
            Backend::PbtStream(s) => s.apply(m),
        }
    }

    /// Λ applied to a program state, validated as a Choi matrix.
    pub fn apply(&self, pi: &DensityOperator) -> Result<ChoiMatrix> {
        let out = self.apply_raw(pi.matrix())?;
        ChoiMatrix::new(self.choi_d_in, self.choi_d_out, hermitize(&out))
    }

    /// The dual map Λ*(X) = Σ_k A_k† X A_k on the Choi space.
    pub fn dual_raw(&self, x: &CMatrix) -> Result<CMatrix> {
        let dim = self.choi_dim();
        if x.nrows() != dim || x.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "dual input is {}x{}, processor `{}` expects {dim}x{dim}",
                x.nrows(),
                x.ncols(),
                self.label
            )));
        }
        match &self.backend {
            Backend::Kraus(ops) => {
                let mut out = CMatrix::zeros(self.program_dim, self.program_dim);
                for k in ops {
                    out += k.adjoint() * x * k;
                }
                Ok(out)
            }
            Backend::PbtStream(s) => s.dual(x),
        }
    }

    /// Kraus operators from program space to Choi space. Materialized on
    /// first use for the streamed port-based backend.
    pub fn kraus_ops(&self) -> &[CMatrix] {
        match &self.backend {
            Backend::Kraus(ops) => ops,
            Backend::PbtStream(s) => self.materialized_kraus.get_or_init(|| s.kraus_ops()),
        }
    }

    /// Λ as an explicit superoperator acting on a Hermitian basis: returns
    /// Λ(B_i) for each element of `basis`.
    pub fn apply_to_basis(&self, basis: &[CMatrix]) -> Result<Vec<CMatrix>> {
        basis.iter().map(|b| self.apply_raw(b)).collect()
    }
}

/// Λ*(I) for unitality checks.
pub fn dual_identity_deviation(p: &ProcessorMap) -> f64 {
    let id = linalg::identity(p.choi_dim());
    let out = p.dual_raw(&id).expect("identity has the right dims");
    linalg::frobenius_norm(&(out - linalg::identity(p.program_dim())))
}
