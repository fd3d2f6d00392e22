//! JSON exchange formats: matrices as {rows, cols, data} with row-major
//! [re, im] pairs, channels as Kraus lists, and the processor/channel
//! specification blocks consumed by the CLI.

use serde::{Deserialize, Serialize};

use crate::channels::{
    amplitude_damping, depolarizing, identity_channel, pauli_channel, rotation_unitary, KrausChannel,
    PauliAxis,
};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::processors::{
    pbt_processor, pbt_reduced_processor, pqc_ad_default, pqc_processor, teleportation_processor,
    PqcSpec, ProcessorMap,
};
use crate::sdp::SdpSolution;
use crate::states::HermitianOperator;

/// Dense complex matrix: row-major entries as [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix JSON claims {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let [re, im] = self.data[i * self.cols + j];
                m[(i, j)] = c(re, im);
            }
        }
        Ok(m)
    }
}

/// Channel as an explicit Kraus list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus: ch.kraus_ops().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .map(|m| m.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(self.d_in, self.d_out, ops)
    }
}

/// Named channel constructors for configuration files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity { d: usize },
    Rotation { theta: f64, axis: String },
    Pauli { probs: Vec<f64> },
    Depolarizing { p: f64, #[serde(default = "default_qubit")] d: usize },
    AmplitudeDamping { p: f64 },
    Kraus { channel: ChannelJson },
}

fn default_qubit() -> usize {
    2
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Identity { d } => identity_channel(*d),
            ChannelSpec::Rotation { theta, axis } => {
                let axis = match axis.to_ascii_lowercase().as_str() {
                    "x" => PauliAxis::X,
                    "y" => PauliAxis::Y,
                    "z" => PauliAxis::Z,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown rotation axis `{other}`"
                        )))
                    }
                };
                rotation_unitary(*theta, axis)
            }
            ChannelSpec::Pauli { probs } => pauli_channel(probs),
            ChannelSpec::Depolarizing { p, d } => depolarizing(*p, *d),
            ChannelSpec::AmplitudeDamping { p } => amplitude_damping(*p),
            ChannelSpec::Kraus { channel } => channel.to_channel(),
        }
    }
}

/// Optional overrides of the default PQC gate set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PqcJson {
    pub h0: Option<MatrixJson>,
    pub h1: Option<MatrixJson>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub theta0: Option<Vec<[f64; 2]>>,
}

/// Processor specification blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProcessorSpec {
    Teleport { d: usize },
    Pbt { n_ports: usize, #[serde(default = "default_qubit")] d: usize },
    PbtReduced { n_ports: usize, #[serde(default = "default_qubit")] d: usize },
    Pqc { n_ports: usize, #[serde(default)] pqc: Option<PqcJson> },
}

impl ProcessorSpec {
    pub fn build(&self) -> Result<ProcessorMap> {
        match self {
            ProcessorSpec::Teleport { d } => teleportation_processor(*d),
            ProcessorSpec::Pbt { n_ports, d } => pbt_processor(*n_ports, *d),
            ProcessorSpec::PbtReduced { n_ports, d } => pbt_reduced_processor(*n_ports, *d),
            ProcessorSpec::Pqc { n_ports, pqc } => {
                let base = pqc_ad_default(0.0)?.with_registers(*n_ports)?;
                let spec = match pqc {
                    None => base,
                    Some(over) => {
                        let h0 = match &over.h0 {
                            Some(m) => HermitianOperator::new(m.to_matrix()?)?,
                            None => base.h0.clone(),
                        };
                        let h1 = match &over.h1 {
                            Some(m) => HermitianOperator::new(m.to_matrix()?)?,
                            None => base.h1.clone(),
                        };
                        let theta0 = match &over.theta0 {
                            Some(v) => {
                                CVector::from_iterator(v.len(), v.iter().map(|[re, im]| c(*re, *im)))
                            }
                            None => base.theta0.clone(),
                        };
                        PqcSpec::new(
                            h0,
                            h1,
                            over.t0.unwrap_or(base.t0),
                            over.t1.unwrap_or(base.t1),
                            *n_ports,
                            theta0,
                            None,
                        )?
                    }
                };
                pqc_processor(&spec)
            }
        }
    }
}

/// Serializable summary of an SDP solve.
#[derive(Debug, Clone, Serialize)]
pub struct SdpSolutionJson {
    pub objective: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub z: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<MatrixJson>,
}

impl SdpSolutionJson {
    pub fn from_solution(sol: &SdpSolution) -> Self {
        Self {
            objective: sol.objective,
            duality_gap: sol.duality_gap,
            iterations: sol.iterations,
            z: MatrixJson::from_matrix(sol.z.matrix()),
            pi: sol.pi.as_ref().map(|p| MatrixJson::from_matrix(p.matrix())),
        }
    }
}
