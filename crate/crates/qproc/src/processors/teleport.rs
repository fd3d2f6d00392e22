//! Teleportation processor: the program replaces the entangled resource of
//! the standard teleportation protocol, and the induced map on Choi space
//! is a twirl over the teleportation unitaries.

use crate::channels::{bell_basis, weyl_heisenberg};
use crate::error::Result;
use crate::linalg::{kron, CMatrix, CVector};
use crate::processors::ProcessorMap;

/// Teleportation data: the d² Weyl–Heisenberg unitaries and the matching
/// Bell projectors.
pub struct TeleSpec {
    pub d: usize,
    pub unitaries: Vec<CMatrix>,
    pub bell_vectors: Vec<CVector>,
}

impl TeleSpec {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            d,
            unitaries: weyl_heisenberg(d)?,
            bell_vectors: bell_basis(d)?,
        })
    }

    pub fn bell_projectors(&self) -> Vec<CMatrix> {
        self.bell_vectors.iter().map(|v| v * v.adjoint()).collect()
    }
}

/// Λ_tele(π) = (1/d²) Σ_i (U_i* ⊗ U_i) π (U_i* ⊗ U_i)†. The map is
/// self-dual: the Kraus set is closed under adjoints up to phases.
pub fn teleportation_processor(d: usize) -> Result<ProcessorMap> {
    let spec = TeleSpec::new(d)?;
    let scale = 1.0 / d as f64;
    let kraus: Vec<CMatrix> = spec
        .unitaries
        .iter()
        .map(|u| kron(&u.map(|z| z.conj()), u).scale(scale))
        .collect();
    Ok(ProcessorMap::from_kraus(
        format!("teleport(d={d})"),
        d * d,
        d,
        d,
        kraus,
    ))
}
