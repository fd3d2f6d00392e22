//! Port-based teleportation processors.
//!
//! The full processor acts on N-port programs (dimension d^{2N}); the
//! reduced processor acts on single-copy Choi programs (dimension d²) and
//! agrees with the full map on tensor-power programs χ^{⊗N}.
//!
//! Subsystem layout of the full contraction space: [D, C, A₁..A_N,
//! B₁..B_N], each factor of dimension d. D is the Choi reference, C the
//! teleported input, A/B the program ports.

use crate::error::{Error, Result};
use crate::linalg::{
    apply_to_vector, embed, frobenius_norm, herm_eig, hermitize, identity, mat_func_psd,
    partial_trace, permute_subsystems, subsystem_offsets, CMatrix, CVector,
    DEFAULT_SUPPORT_CUTOFF,
};
use crate::processors::{Backend, ProcessorMap};
use crate::states::{ChoiMatrix, DensityOperator};

/// Default cap on the largest tensor space a constructor may build,
/// applied to d^{2N+1} for the full processor and d^{N+1} for the reduced
/// one.
pub const DEFAULT_DIM_LIMIT: usize = 1 << 13;

/// The port-selection POVM {Π_i} on A⊗C together with its ingredients.
pub struct PbtSpec {
    pub n_ports: usize,
    pub d: usize,
    /// Π_i on [A₁..A_N, C], C last.
    pub povm: Vec<CMatrix>,
    pub sigma_ac: CMatrix,
    pub delta: CMatrix,
}

impl PbtSpec {
    pub fn new(n_ports: usize, d: usize) -> Result<Self> {
        if n_ports < 1 {
            return Err(Error::InvalidArgument("PBT needs at least one port".into()));
        }
        if d < 2 {
            return Err(Error::InvalidArgument(format!("PBT needs d >= 2, got {d}")));
        }
        let n = n_ports;
        let dims = vec![d; n + 1];
        let dim: usize = dims.iter().product();
        let phi = crate::states::max_entangled_projector(d)?;

        let mut sigma = CMatrix::zeros(dim, dim);
        let mut phis = Vec::with_capacity(n);
        for i in 0..n {
            let p = embed(&phi, &[i, n], &dims)?;
            sigma += &p;
            phis.push(p);
        }
        let sigma_inv_sqrt = mat_func_psd(
            &hermitize(&sigma),
            |l| 1.0 / l.max(0.0).sqrt(),
            DEFAULT_SUPPORT_CUTOFF,
        )?;

        let mut tildes: Vec<CMatrix> = phis
            .iter()
            .map(|p| hermitize(&(&sigma_inv_sqrt * p * &sigma_inv_sqrt)))
            .collect();
        let mut tilde_sum = CMatrix::zeros(dim, dim);
        for t in &tildes {
            tilde_sum += t;
        }
        let delta = hermitize(&(identity(dim) - tilde_sum)).scale(1.0 / n as f64);
        for t in &mut tildes {
            *t += &delta;
        }
        let povm = tildes;

        // POVM validity: each element PSD, elements summing to identity.
        let mut sum = CMatrix::zeros(dim, dim);
        for p in &povm {
            let min = herm_eig(p)?.eigenvalues[dim - 1];
            if min < -1e-10 {
                return Err(Error::NonConvergence(format!(
                    "PBT POVM element has eigenvalue {min:.3e}"
                )));
            }
            sum += p;
        }
        if frobenius_norm(&(sum - identity(dim))) > 1e-9 {
            return Err(Error::NonConvergence("PBT POVM does not sum to identity".into()));
        }

        Ok(Self { n_ports, d, povm, sigma_ac: hermitize(&sigma), delta })
    }
}

/// Per-port contraction operators W_i of the full PBT map: W_i maps a
/// program ket into the total space after √Π_i, so that
/// Λ(π) = Σ_i Tr_{C A B̄_i}[W_i π W_i†].
pub(super) struct PbtStream {
    n_ports: usize,
    d: usize,
    total_dims: Vec<usize>,
    contraction: Vec<CMatrix>,
}

impl PbtStream {
    fn new(spec: &PbtSpec) -> Result<Self> {
        let n = spec.n_ports;
        let d = spec.d;
        let total_dims = vec![d; 2 * n + 2];
        let total: usize = total_dims.iter().product();
        let prog_dim = d.pow(2 * n as u32);
        // Π_i lives on [A₁..A_N, C]: global positions [2..N+2) then C = 1.
        let mut povm_pos: Vec<usize> = (2..n + 2).collect();
        povm_pos.push(1);
        let inv_sqrt_d = 1.0 / (d as f64).sqrt();

        let a_pos: Vec<usize> = (2..n + 2).collect();
        let b_pos: Vec<usize> = (n + 2..2 * n + 2).collect();
        let a_off = subsystem_offsets(&total_dims, &a_pos);
        let b_off = subsystem_offsets(&total_dims, &b_pos);
        let dc_off = subsystem_offsets(&total_dims, &[0, 1]);

        let mut contraction = Vec::with_capacity(n);
        for povm in &spec.povm {
            let sqrt_povm = mat_func_psd(povm, |l| l.max(0.0).sqrt(), DEFAULT_SUPPORT_CUTOFF)?;
            let mut w = CMatrix::zeros(total, prog_dim);
            let mut v = CVector::zeros(total);
            for col in 0..prog_dim {
                let (a, b) = (col / b_off.len(), col % b_off.len());
                v.fill(num_complex::Complex64::default());
                for j in 0..d {
                    v[dc_off[j * d + j] + a_off[a] + b_off[b]] =
                        num_complex::Complex64::new(inv_sqrt_d, 0.0);
                }
                let out = apply_to_vector(&sqrt_povm, &povm_pos, &total_dims, &v)?;
                w.set_column(col, &out);
            }
            contraction.push(w);
        }
        Ok(Self { n_ports: n, d, total_dims, contraction })
    }

    fn keep_positions(&self, port: usize) -> [usize; 2] {
        [0, self.n_ports + 2 + port]
    }

    pub(super) fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        let d2 = self.d * self.d;
        let mut out = CMatrix::zeros(d2, d2);
        for (i, w) in self.contraction.iter().enumerate() {
            let big = w * m * w.adjoint();
            out += partial_trace(&big, &self.total_dims, &self.keep_positions(i))?;
        }
        Ok(out)
    }

    pub(super) fn dual(&self, x: &CMatrix) -> Result<CMatrix> {
        let prog = self.contraction[0].ncols();
        let mut out = CMatrix::zeros(prog, prog);
        for (i, w) in self.contraction.iter().enumerate() {
            let embedded = embed(x, &self.keep_positions(i), &self.total_dims)?;
            out += w.adjoint() * embedded * w;
        }
        Ok(out)
    }

    pub(super) fn kraus_ops(&self) -> Vec<CMatrix> {
        let d2 = self.d * self.d;
        let prog = self.contraction[0].ncols();
        let mut ops = Vec::new();
        for (i, w) in self.contraction.iter().enumerate() {
            let keep = self.keep_positions(i);
            let traced: Vec<usize> =
                (0..self.total_dims.len()).filter(|p| !keep.contains(p)).collect();
            let out_off = subsystem_offsets(&self.total_dims, &keep);
            let tr_off = subsystem_offsets(&self.total_dims, &traced);
            for &t in &tr_off {
                let mut k = CMatrix::zeros(d2, prog);
                for (o, &oo) in out_off.iter().enumerate() {
                    for col in 0..prog {
                        k[(o, col)] = w[(oo + t, col)];
                    }
                }
                if frobenius_norm(&k) > 1e-14 {
                    ops.push(k);
                }
            }
        }
        ops
    }
}

/// Full port-based teleportation processor on N-port programs.
pub fn pbt_processor(n_ports: usize, d: usize) -> Result<ProcessorMap> {
    pbt_processor_with_limit(n_ports, d, DEFAULT_DIM_LIMIT)
}

pub fn pbt_processor_with_limit(n_ports: usize, d: usize, dim_limit: usize) -> Result<ProcessorMap> {
    let required = d
        .checked_pow(2 * n_ports as u32 + 1)
        .ok_or(Error::DimensionLimit { required: usize::MAX, limit: dim_limit })?;
    if required > dim_limit {
        return Err(Error::DimensionLimit { required, limit: dim_limit });
    }
    let spec = PbtSpec::new(n_ports, d)?;
    let stream = PbtStream::new(&spec)?;
    Ok(ProcessorMap {
        label: format!("pbt(N={n_ports},d={d})"),
        program_dim: d.pow(2 * n_ports as u32),
        choi_d_in: d,
        choi_d_out: d,
        backend: Backend::PbtStream(stream),
        materialized_kraus: std::sync::OnceLock::new(),
    })
}

/// Reduced PBT map on single-copy Choi programs: Λ̃(χ) coincides with the
/// full map applied to χ^{⊗N}. The per-port POVM is contracted over the
/// other ports once at construction, so applications stay d²-sized.
pub fn pbt_reduced_processor(n_ports: usize, d: usize) -> Result<ProcessorMap> {
    pbt_reduced_processor_with_limit(n_ports, d, DEFAULT_DIM_LIMIT)
}

pub fn pbt_reduced_processor_with_limit(
    n_ports: usize,
    d: usize,
    dim_limit: usize,
) -> Result<ProcessorMap> {
    let required = d
        .checked_pow(n_ports as u32 + 1)
        .ok_or(Error::DimensionLimit { required: usize::MAX, limit: dim_limit })?;
    if required > dim_limit {
        return Err(Error::DimensionLimit { required, limit: dim_limit });
    }
    let spec = PbtSpec::new(n_ports, d)?;
    let n = n_ports;
    let povm_dims = vec![d; n + 1];
    // Small contraction space [D, C, A, B].
    let small_dims = vec![d; 4];
    let small: usize = small_dims.iter().product();
    let d2 = d * d;
    let scale = 1.0 / (d as f64).powi(n as i32 - 1).sqrt();
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();

    let a_off = subsystem_offsets(&small_dims, &[2]);
    let b_off = subsystem_offsets(&small_dims, &[3]);
    let dc_off = subsystem_offsets(&small_dims, &[0, 1]);
    let out_off = subsystem_offsets(&small_dims, &[0, 3]);
    let tr_off = subsystem_offsets(&small_dims, &[1, 2]);

    let mut kraus = Vec::with_capacity(n * d2);
    for (i, povm) in spec.povm.iter().enumerate() {
        // Tr over the other ports of Π_i, acting on (A_i, C).
        let g = partial_trace(povm, &povm_dims, &[i, n])?;
        let sqrt_g = mat_func_psd(&hermitize(&g), |l| l.max(0.0).sqrt(), DEFAULT_SUPPORT_CUTOFF)?;
        // Columns of (√G ⊗ 1_{BD})(1_{AB} ⊗ |Φ_DC⟩), then split rows into
        // Kraus operators indexed by the traced (C, A) basis.
        let mut w = CMatrix::zeros(small, d2);
        let mut v = CVector::zeros(small);
        for col in 0..d2 {
            let (a, b) = (col / d, col % d);
            v.fill(num_complex::Complex64::default());
            for j in 0..d {
                v[dc_off[j * d + j] + a_off[a] + b_off[b]] =
                    num_complex::Complex64::new(inv_sqrt_d, 0.0);
            }
            let out = apply_to_vector(&sqrt_g, &[2, 1], &small_dims, &v)?;
            w.set_column(col, &out);
        }
        for &t in &tr_off {
            let mut k = CMatrix::zeros(d2, d2);
            for (o, &oo) in out_off.iter().enumerate() {
                for col in 0..d2 {
                    k[(o, col)] = w[(oo + t, col)] * num_complex::Complex64::new(scale, 0.0);
                }
            }
            if frobenius_norm(&k) > 1e-14 {
                kraus.push(k);
            }
        }
    }
    Ok(ProcessorMap::from_kraus(
        format!("pbt_reduced(N={n_ports},d={d})"),
        d2,
        d,
        d,
        kraus,
    ))
}

/// χ^{⊗N}, reordered from per-port (A_k B_k) factors into the processor's
/// [A₁..A_N, B₁..B_N] program layout.
pub fn choi_power_program(chi: &ChoiMatrix, n_ports: usize) -> Result<DensityOperator> {
    let d_in = chi.d_in();
    let d_out = chi.d_out();
    let mut m = chi.matrix().clone();
    for _ in 1..n_ports {
        m = m.kronecker(chi.matrix());
    }
    let mut dims = Vec::with_capacity(2 * n_ports);
    for _ in 0..n_ports {
        dims.push(d_in);
        dims.push(d_out);
    }
    let new_order: Vec<usize> = (0..2 * n_ports)
        .map(|q| if q < n_ports { 2 * q } else { 2 * (q - n_ports) + 1 })
        .collect();
    let reordered = permute_subsystems(&m, &dims, &new_order)?;
    DensityOperator::new(hermitize(&reordered))
}

/// π_sym = (1/N!) Σ_s P_s π P_s†, averaging over simultaneous permutations
/// of the A and B ports.
pub fn symmetrize_program(pi: &DensityOperator, n_ports: usize, d: usize) -> Result<DensityOperator> {
    if n_ports > 5 {
        return Err(Error::InvalidArgument(format!(
            "symmetrization enumerates N! permutations; N = {n_ports} is too large (max 5)"
        )));
    }
    let prog_dim = d.pow(2 * n_ports as u32);
    if pi.dim() != prog_dim {
        return Err(Error::DimensionMismatch(format!(
            "program has dim {}, expected {prog_dim}",
            pi.dim()
        )));
    }
    let perms = permutations(n_ports);
    let dims = vec![d; 2 * n_ports];
    let mut strides = vec![1usize; 2 * n_ports];
    for k in (0..2 * n_ports - 1).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut out = CMatrix::zeros(prog_dim, prog_dim);
    let weight = 1.0 / perms.len() as f64;
    let mut map = vec![0usize; prog_dim];
    for s in &perms {
        for (idx, slot) in map.iter_mut().enumerate() {
            let mut digits = vec![0usize; 2 * n_ports];
            let mut rem = idx;
            for k in (0..2 * n_ports).rev() {
                digits[k] = rem % d;
                rem /= d;
            }
            let mut new_idx = 0usize;
            for port in 0..n_ports {
                new_idx += digits[port] * strides[s[port]];
                new_idx += digits[n_ports + port] * strides[n_ports + s[port]];
            }
            *slot = new_idx;
        }
        for i in 0..prog_dim {
            for j in 0..prog_dim {
                out[(map[i], map[j])] += pi.matrix()[(i, j)] * weight;
            }
        }
    }
    DensityOperator::new(hermitize(&out))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Number of independent parameters of a port-symmetric program:
/// C(N + d⁴ - 1, d⁴ - 1).
pub fn symmetric_param_count(n_ports: usize, d: usize) -> Result<u128> {
    let r = (d as u128).pow(4) - 1;
    let n = n_ports as u128 + r;
    let mut result: u128 = 1;
    for k in 1..=r {
        let term = n - r + k;
        result = result
            .checked_mul(term)
            .ok_or_else(|| Error::InvalidArgument("symmetric parameter count overflows u128".into()))?
            / k;
    }
    Ok(result)
}
