//! Semidefinite programming for the diamond norm and the joint
//! optimal-program search, via a primal log-barrier interior-point method.
//!
//! Two problem shapes are supported:
//!
//! * `diamond_distance`: minimize 2‖Tr₂Z‖_∞ over Z ⪰ 0, Z ⪰ dχ_Ω, which
//!   evaluates the diamond distance of the Hermitian-Choi difference χ_Ω.
//! * `optimal_program_sdp`: the same objective with the program state π as
//!   an additional variable (π ⪰ 0, Tr π = 1, optionally Tr_B π = I/d),
//!   minimizing the diamond distance over all programs at once.
//!
//! Hermitian variables are vectorized over an orthonormal Hermitian basis
//! (real diagonal units plus symmetric/antisymmetric off-diagonal pairs),
//! so the Newton systems are ordinary real symmetric solves. Duality gaps
//! are certified by constructing an explicit dual-feasible point from the
//! central-path multipliers, never from the barrier parameter alone.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, c, herm_eig, hermitize, hs_inner, identity, partial_trace, CMatrix};
use crate::processors::ProcessorMap;
use crate::states::{ChoiMatrix, DensityOperator, HermitianOperator};

pub const DEFAULT_SDP_TOL: f64 = 1e-6;
pub const MAX_NEWTON_ITERATIONS: usize = 200;

/// Solution of one of the two SDP forms.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal objective 2‖Tr₂Z‖_∞ at the returned iterate.
    pub objective: f64,
    pub z: HermitianOperator,
    /// Optimal program, present for the joint problem.
    pub pi: Option<DensityOperator>,
    /// Certified gap: objective minus an explicit dual lower bound.
    pub duality_gap: f64,
    /// Total Newton steps.
    pub iterations: usize,
}

/// Program-variable constraint set of the joint problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramConstraint {
    /// All density operators on the program space.
    Full,
    /// Choi-like programs: Tr over the second factor fixed to I/d.
    ChoiSet,
}

/// Orthonormal Hermitian basis: diagonal units, then (E_ij+E_ji)/√2 and
/// i(E_ij−E_ji)/√2 for i < j.
pub(crate) fn herm_basis(dim: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, i)] = c(1.0, 0.0);
        basis.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = c(s, 0.0);
            m[(j, i)] = c(s, 0.0);
            basis.push(m);
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = c(0.0, -s);
            m[(j, i)] = c(0.0, s);
            basis.push(m);
        }
    }
    basis
}

/// Orthonormal basis of traceless Hermitian matrices (generalized
/// Gell-Mann construction).
pub(crate) fn traceless_herm_basis(dim: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(dim * dim - 1);
    for k in 1..dim {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..k {
            m[(i, i)] = c(norm, 0.0);
        }
        m[(k, k)] = c(-(k as f64) * norm, 0.0);
        basis.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = c(s, 0.0);
            m[(j, i)] = c(s, 0.0);
            basis.push(m);
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = c(0.0, -s);
            m[(j, i)] = c(0.0, s);
            basis.push(m);
        }
    }
    basis
}

/// Basis of {H Hermitian on A⊗B : Tr_B H = 0}: every Hermitian on A
/// tensored with every traceless Hermitian on B.
fn tr_b_free_basis(d_a: usize, d_b: usize) -> Vec<CMatrix> {
    let a_basis = herm_basis(d_a);
    let b_basis = traceless_herm_basis(d_b);
    let mut out = Vec::with_capacity(a_basis.len() * b_basis.len());
    for a in &a_basis {
        for b in &b_basis {
            out.push(a.kronecker(b));
        }
    }
    out
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix, or None
/// when any pivot fails. nalgebra's complex Cholesky does not reject
/// indefinite inputs, so the cone-membership tests use this instead.
fn chol_lower(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let dj = diag.sqrt();
        l[(j, j)] = c(dj, 0.0);
        for i in j + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / dj;
        }
    }
    Some(l)
}

fn chol_logdet(l: &CMatrix) -> f64 {
    2.0 * (0..l.nrows()).map(|k| l[(k, k)].re.ln()).sum::<f64>()
}

/// S^{-1} from its Cholesky factor via two triangular solves.
fn chol_inverse(l: &CMatrix) -> CMatrix {
    let n = l.nrows();
    // Forward: L Y = I.
    let mut y = CMatrix::zeros(n, n);
    for col in 0..n {
        for i in 0..n {
            let mut acc = if i == col { c(1.0, 0.0) } else { c(0.0, 0.0) };
            for k in 0..i {
                acc -= l[(i, k)] * y[(k, col)];
            }
            y[(i, col)] = acc / l[(i, i)];
        }
    }
    // Backward: L† X = Y.
    let mut x = CMatrix::zeros(n, n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = y[(i, col)];
            for k in i + 1..n {
                acc -= l[(k, i)].conj() * x[(k, col)];
            }
            x[(i, col)] = acc / l[(i, i)].conj();
        }
    }
    hermitize(&x)
}

struct Block {
    base: CMatrix,
    derivs: Vec<(usize, CMatrix)>,
}

struct BarrierSdp {
    nvars: usize,
    objective: DVector<f64>,
    blocks: Vec<Block>,
}

struct CenterState {
    /// S_j^{-1} per block at the final iterate.
    inverses: Vec<CMatrix>,
}

impl BarrierSdp {
    fn block_value(&self, j: usize, v: &DVector<f64>) -> CMatrix {
        let mut s = self.blocks[j].base.clone();
        for (i, e) in &self.blocks[j].derivs {
            s += e.scale(v[*i]);
        }
        hermitize(&s)
    }

    fn feasible(&self, v: &DVector<f64>) -> bool {
        (0..self.blocks.len()).all(|j| chol_lower(&self.block_value(j, v)).is_some())
    }

    fn barrier_value(&self, v: &DVector<f64>, mu: f64) -> Option<f64> {
        let mut val = self.objective.dot(v);
        for j in 0..self.blocks.len() {
            let l = chol_lower(&self.block_value(j, v))?;
            val -= mu * chol_logdet(&l);
        }
        Some(val)
    }

    /// Damped-Newton centering at a fixed barrier parameter.
    fn center(
        &self,
        v: &mut DVector<f64>,
        mu: f64,
        max_steps: usize,
        decrement_tol: f64,
    ) -> Result<(usize, CenterState)> {
        let mut steps = 0;
        loop {
            let mut inverses = Vec::with_capacity(self.blocks.len());
            for j in 0..self.blocks.len() {
                let s = self.block_value(j, v);
                let l = chol_lower(&s).ok_or_else(|| Error::SdpFailure {
                    message: "iterate left the positive cone".into(),
                    gap: f64::NAN,
                    iterations: steps,
                })?;
                inverses.push(chol_inverse(&l));
            }

            let mut grad = self.objective.clone();
            let mut hess = DMatrix::<f64>::zeros(self.nvars, self.nvars);
            for (j, block) in self.blocks.iter().enumerate() {
                let sinv = &inverses[j];
                let mut mids: Vec<(usize, CMatrix)> = Vec::with_capacity(block.derivs.len());
                for (i, e) in &block.derivs {
                    grad[*i] -= mu * hs_inner(sinv, e);
                    mids.push((*i, sinv * e));
                }
                for (a, (ia, ma)) in mids.iter().enumerate() {
                    for (ib, mb) in mids.iter().skip(a) {
                        // Tr(S⁻¹E_a S⁻¹E_b) without forming the product.
                        let t = trace_product(ma, mb);
                        hess[(*ia, *ib)] += mu * t;
                        if ia != ib {
                            hess[(*ib, *ia)] += mu * t;
                        }
                    }
                }
            }

            let mut ridge = 0.0;
            let dir = loop {
                let mut h = hess.clone();
                if ridge > 0.0 {
                    for k in 0..self.nvars {
                        h[(k, k)] += ridge;
                    }
                }
                match Cholesky::new(h) {
                    Some(ch) => break ch.solve(&(-&grad)),
                    None => {
                        ridge = if ridge == 0.0 { 1e-12 } else { ridge * 100.0 };
                        if ridge > 1.0 {
                            return Err(Error::SdpFailure {
                                message: "Newton system is singular".into(),
                                gap: f64::NAN,
                                iterations: steps,
                            });
                        }
                    }
                }
            };
            let decrement = -grad.dot(&dir) / 2.0;
            if decrement <= decrement_tol || steps >= max_steps {
                return Ok((steps, CenterState { inverses }));
            }

            let phi0 = self.barrier_value(v, mu).ok_or_else(|| Error::SdpFailure {
                message: "barrier undefined at iterate".into(),
                gap: f64::NAN,
                iterations: steps,
            })?;
            let slope = grad.dot(&dir);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = v.clone() + dir.scale(t);
                if self.feasible(&cand) {
                    if let Some(phi) = self.barrier_value(&cand, mu) {
                        if phi <= phi0 + 0.01 * t * slope {
                            *v = cand;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return Ok((steps, CenterState { inverses }));
            }
            steps += 1;
        }
    }
}

/// Re Tr(AB) via entry sums.
fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = a[(i, j)] * b[(j, i)];
            acc += p.re;
        }
    }
    acc
}

fn lambda_max(h: &CMatrix) -> f64 {
    herm_eig(h).map(|e| e.eigenvalues[0]).unwrap_or(f64::NAN)
}

fn positive_part(h: &CMatrix) -> Result<CMatrix> {
    linalg::mat_func_psd(h, |l| l.max(0.0), 0.0)
}

/// Largest eigenvalue of W^{-1/2} Y W^{-1/2}, used to clip Y under W.
fn relative_lambda_max(y: &CMatrix, w: &CMatrix) -> Result<f64> {
    let w_inv_sqrt = linalg::mat_func_psd(w, |l| 1.0 / l.max(1e-300).sqrt(), 1e-14)?;
    let m = hermitize(&(&w_inv_sqrt * y * &w_inv_sqrt));
    Ok(lambda_max(&m))
}

/// Rescale the pair (Y₁, Y₃) from the central path into a dual-feasible
/// pair: Tr Y₁ = 2 and 0 ⪯ Y₃ ⪯ Y₁ ⊗ I.
fn feasible_dual_pair(
    s1_inv: &CMatrix,
    s3_inv: &CMatrix,
    mu: f64,
    d_out: usize,
) -> Result<Option<CMatrix>> {
    let y1 = s1_inv.scale(mu);
    let tr = linalg::trace(&y1).re;
    if tr <= 0.0 {
        return Ok(None);
    }
    let y1 = y1.scale(2.0 / tr);
    let cap = y1.kronecker(&identity(d_out));
    let mut y3 = s3_inv.scale(mu);
    let lam = relative_lambda_max(&y3, &cap)?;
    if lam > 1.0 {
        y3 = y3.scale(1.0 / lam);
    }
    Ok(Some(y3))
}

fn run_barrier<P, D>(
    sdp: &BarrierSdp,
    v: &mut DVector<f64>,
    tol: f64,
    primal: P,
    dual: D,
) -> Result<(f64, usize)>
where
    P: Fn(&DVector<f64>) -> Result<f64>,
    D: Fn(&CenterState, f64) -> Result<f64>,
{
    if !sdp.feasible(v) {
        return Err(Error::SdpFailure {
            message: "initial point infeasible".into(),
            gap: f64::NAN,
            iterations: 0,
        });
    }
    let nu: usize = sdp.blocks.iter().map(|b| b.base.nrows()).sum();
    let mut mu = 1.0f64.max(primal(v)?.abs() / nu as f64);
    let mut total = 0usize;
    let mut last_gap = f64::NAN;
    loop {
        let budget = MAX_NEWTON_ITERATIONS.saturating_sub(total);
        if budget == 0 {
            return Err(Error::SdpFailure {
                message: "Newton iteration budget exhausted".into(),
                gap: last_gap,
                iterations: total,
            });
        }
        let (steps, state) = sdp.center(v, mu, budget.min(50), 1e-4 * mu)?;
        total += steps.max(1);
        if mu * (nu as f64) <= tol / 3.0 {
            let p = primal(v)?;
            let lb = dual(&state, mu)?;
            last_gap = p - lb;
            if last_gap <= tol {
                return Ok((last_gap, total));
            }
        }
        mu /= 10.0;
    }
}

struct DiamondProblem {
    sdp: BarrierSdp,
    d_in: usize,
    d_out: usize,
    z_basis: Vec<CMatrix>,
    chi_omega: CMatrix,
    scale_d: f64,
}

impl DiamondProblem {
    /// Variables [t, z…]; blocks tI − Tr₂Z, Z, Z − dχ_Ω.
    fn new(chi_omega: CMatrix, d_in: usize, d_out: usize) -> Result<Self> {
        let dim = d_in * d_out;
        let z_basis = herm_basis(dim);
        let nvars = 1 + z_basis.len();
        let scale_d = d_in as f64;
        let dims2 = [d_in, d_out];

        let mut objective = DVector::zeros(nvars);
        objective[0] = 2.0;

        let mut b1 = Block { base: CMatrix::zeros(d_in, d_in), derivs: vec![(0, identity(d_in))] };
        let mut b2 = Block { base: CMatrix::zeros(dim, dim), derivs: Vec::new() };
        let mut b3 = Block { base: chi_omega.scale(-scale_d), derivs: Vec::new() };
        for (k, e) in z_basis.iter().enumerate() {
            b1.derivs.push((1 + k, partial_trace(e, &dims2, &[0])?.scale(-1.0)));
            b2.derivs.push((1 + k, e.clone()));
            b3.derivs.push((1 + k, e.clone()));
        }
        Ok(Self {
            sdp: BarrierSdp { nvars, objective, blocks: vec![b1, b2, b3] },
            d_in,
            d_out,
            z_basis,
            chi_omega,
            scale_d,
        })
    }

    fn initial_point(&self) -> Result<DVector<f64>> {
        let pos = positive_part(&self.chi_omega)?.scale(self.scale_d);
        let eps = 0.1 + 0.05 * lambda_max(&self.chi_omega).abs() * self.scale_d;
        let z0 = pos + identity(self.z_basis[0].nrows()).scale(eps);
        let mut v = DVector::zeros(self.sdp.nvars);
        for (k, e) in self.z_basis.iter().enumerate() {
            v[1 + k] = hs_inner(e, &z0);
        }
        let tr2 = partial_trace(&z0, &[self.d_in, self.d_out], &[0])?;
        v[0] = lambda_max(&tr2) * 1.2 + 0.1;
        Ok(v)
    }

    fn z_matrix(&self, v: &DVector<f64>) -> CMatrix {
        let dim = self.z_basis[0].nrows();
        let mut z = CMatrix::zeros(dim, dim);
        for (k, e) in self.z_basis.iter().enumerate() {
            z += e.scale(v[1 + k]);
        }
        hermitize(&z)
    }

    fn primal_value(&self, v: &DVector<f64>) -> Result<f64> {
        let z = self.z_matrix(v);
        let tr2 = partial_trace(&z, &[self.d_in, self.d_out], &[0])?;
        Ok(2.0 * lambda_max(&tr2))
    }

    /// Dual lower bound d⟨Y₃, χ_Ω⟩ from a feasible (Y₁, Y₃) pair.
    fn dual_bound(&self, state: &CenterState, mu: f64) -> Result<f64> {
        match feasible_dual_pair(&state.inverses[0], &state.inverses[2], mu, self.d_out)? {
            Some(y3) => Ok(self.scale_d * hs_inner(&y3, &self.chi_omega)),
            None => Ok(f64::NEG_INFINITY),
        }
    }
}

/// Diamond distance of the channel difference with Hermitian Choi matrix
/// `chi_omega` on d_in ⊗ d_out: minimize 2‖Tr₂Z‖_∞ over Z ⪰ 0, Z ⪰ dχ_Ω.
pub fn diamond_distance(chi_omega: &HermitianOperator, d_in: usize, tol: f64) -> Result<SdpSolution> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("SDP tolerance must be positive".into()));
    }
    let dim = chi_omega.dim();
    if dim % d_in != 0 {
        return Err(Error::DimensionMismatch(format!(
            "Choi dimension {dim} not divisible by d_in {d_in}"
        )));
    }
    let d_out = dim / d_in;
    let prob = DiamondProblem::new(chi_omega.matrix().clone(), d_in, d_out)?;
    let mut v = prob.initial_point()?;
    let (gap, iterations) = run_barrier(
        &prob.sdp,
        &mut v,
        tol,
        |v| prob.primal_value(v),
        |s, mu| prob.dual_bound(s, mu),
    )?;
    Ok(SdpSolution {
        objective: prob.primal_value(&v)?,
        z: HermitianOperator::new(prob.z_matrix(&v))?,
        pi: None,
        duality_gap: gap,
        iterations,
    })
}

struct JointProblem {
    sdp: BarrierSdp,
    d_in: usize,
    d_out: usize,
    z_basis: Vec<CMatrix>,
    pi_basis: Vec<CMatrix>,
    pi_base: CMatrix,
    chi_e: CMatrix,
    scale_d: f64,
    program_dim: usize,
    constraint: ProgramConstraint,
    dual_map: Box<dyn Fn(&CMatrix) -> CMatrix>,
}

impl JointProblem {
    fn z_matrix(&self, v: &DVector<f64>) -> CMatrix {
        let dim = self.d_in * self.d_out;
        let mut z = CMatrix::zeros(dim, dim);
        for (k, e) in self.z_basis.iter().enumerate() {
            z += e.scale(v[1 + k]);
        }
        hermitize(&z)
    }

    fn pi_matrix(&self, v: &DVector<f64>) -> CMatrix {
        let off = 1 + self.z_basis.len();
        let mut pi = self.pi_base.clone();
        for (k, e) in self.pi_basis.iter().enumerate() {
            pi += e.scale(v[off + k]);
        }
        hermitize(&pi)
    }

    fn primal_value(&self, v: &DVector<f64>) -> Result<f64> {
        let z = self.z_matrix(v);
        let tr2 = partial_trace(&z, &[self.d_in, self.d_out], &[0])?;
        Ok(2.0 * lambda_max(&tr2))
    }

    /// Dual bound: with Y₃ clipped under Y₁⊗I, the stationarity block for
    /// π demands νI + W⊗I_B ⪰ dΛ*(Y₃); the cheapest valid (ν, W) is read
    /// off the decomposition of dΛ*(Y₃), and the bound is
    /// d⟨Y₃, χ_E⟩ − ν − Tr W / d.
    fn dual_bound(&self, state: &CenterState, mu: f64) -> Result<f64> {
        let y3 = match feasible_dual_pair(&state.inverses[0], &state.inverses[2], mu, self.d_out)? {
            Some(y3) => y3,
            None => return Ok(f64::NEG_INFINITY),
        };
        let g = hermitize(&(self.dual_map)(&y3)).scale(self.scale_d);
        let value = self.scale_d * hs_inner(&y3, &self.chi_e);
        match self.constraint {
            ProgramConstraint::Full => Ok(value - lambda_max(&g)),
            ProgramConstraint::ChoiSet => {
                let d_a = self.d_in;
                let d_b = self.program_dim / d_a;
                let w_part = partial_trace(&g, &[d_a, d_b], &[0])?.scale(1.0 / d_b as f64);
                let g_perp = &g - w_part.kronecker(&identity(d_b));
                let delta = lambda_max(&hermitize(&g_perp)).max(0.0);
                let tr_w = linalg::trace(&w_part).re;
                Ok(value - tr_w / d_a as f64 - delta)
            }
        }
    }
}

/// Joint minimization of the diamond distance over program states:
/// minimize 2‖Tr₂Z‖_∞ over Z ⪰ 0, π ⪰ 0, Tr π = 1, Z ⪰ d(χ_E − Λ(π)),
/// optionally restricted to the Choi set Tr_B π = I/d.
pub fn optimal_program_sdp(
    processor: &ProcessorMap,
    target: &ChoiMatrix,
    tol: f64,
    constraint: ProgramConstraint,
) -> Result<SdpSolution> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("SDP tolerance must be positive".into()));
    }
    if processor.choi_d_in() != target.d_in() || processor.choi_d_out() != target.d_out() {
        return Err(Error::DimensionMismatch(format!(
            "processor outputs a {}x{} Choi matrix, target is {}x{}",
            processor.choi_d_in(),
            processor.choi_d_out(),
            target.d_in(),
            target.d_out()
        )));
    }
    let d_in = target.d_in();
    let d_out = target.d_out();
    let dim = d_in * d_out;
    let p_dim = processor.program_dim();
    let scale_d = d_in as f64;

    let pi_basis = match constraint {
        ProgramConstraint::Full => traceless_herm_basis(p_dim),
        ProgramConstraint::ChoiSet => {
            if p_dim % d_in != 0 || p_dim / d_in < 2 {
                return Err(Error::InvalidArgument(format!(
                    "choi_set constraint needs a program on {d_in}⊗k, got dimension {p_dim}"
                )));
            }
            tr_b_free_basis(d_in, p_dim / d_in)
        }
    };
    let pi_base = identity(p_dim).scale(1.0 / p_dim as f64);
    let z_basis = herm_basis(dim);
    let nvars = 1 + z_basis.len() + pi_basis.len();

    let mut objective = DVector::zeros(nvars);
    objective[0] = 2.0;

    let chi_e = target.matrix().clone();
    let lambda_pi0 = processor.apply_raw(&pi_base)?;
    let dims2 = [d_in, d_out];

    let mut b1 = Block { base: CMatrix::zeros(d_in, d_in), derivs: vec![(0, identity(d_in))] };
    let mut b2 = Block { base: CMatrix::zeros(dim, dim), derivs: Vec::new() };
    let mut b3 = Block { base: (&lambda_pi0 - &chi_e).scale(scale_d), derivs: Vec::new() };
    let mut b4 = Block { base: pi_base.clone(), derivs: Vec::new() };
    for (k, e) in z_basis.iter().enumerate() {
        b1.derivs.push((1 + k, partial_trace(e, &dims2, &[0])?.scale(-1.0)));
        b2.derivs.push((1 + k, e.clone()));
        b3.derivs.push((1 + k, e.clone()));
    }
    let off = 1 + z_basis.len();
    for (k, e) in pi_basis.iter().enumerate() {
        b3.derivs.push((off + k, processor.apply_raw(e)?.scale(scale_d)));
        b4.derivs.push((off + k, e.clone()));
    }
    let sdp = BarrierSdp { nvars, objective, blocks: vec![b1, b2, b3, b4] };

    // Strictly feasible start: π = I/P, Z = d(χ_E − Λ(π))⁺ + εI.
    let chi_omega0 = hermitize(&(&chi_e - &lambda_pi0));
    let pos = positive_part(&chi_omega0)?.scale(scale_d);
    let eps = 0.1 + 0.05 * lambda_max(&chi_omega0).abs() * scale_d;
    let z0 = pos + identity(dim).scale(eps);
    let mut v = DVector::zeros(nvars);
    for (k, e) in z_basis.iter().enumerate() {
        v[1 + k] = hs_inner(e, &z0);
    }
    v[0] = lambda_max(&partial_trace(&z0, &dims2, &[0])?) * 1.2 + 0.1;

    let kraus: Vec<CMatrix> = processor.kraus_ops().to_vec();
    let prog_dim = p_dim;
    let dual_map = Box::new(move |x: &CMatrix| {
        let mut out = CMatrix::zeros(prog_dim, prog_dim);
        for k in &kraus {
            out += k.adjoint() * x * k;
        }
        out
    });

    let prob = JointProblem {
        sdp,
        d_in,
        d_out,
        z_basis,
        pi_basis,
        pi_base,
        chi_e,
        scale_d,
        program_dim: p_dim,
        constraint,
        dual_map,
    };
    let mut v = {
        let mut tmp = v;
        if !prob.sdp.feasible(&tmp) {
            // Enlarge the slack if the positive-part start is borderline.
            tmp[0] += 1.0;
        }
        tmp
    };
    let (gap, iterations) = run_barrier(
        &prob.sdp,
        &mut v,
        tol,
        |v| prob.primal_value(v),
        |s, mu| prob.dual_bound(s, mu),
    )?;
    Ok(SdpSolution {
        objective: prob.primal_value(&v)?,
        z: HermitianOperator::new(prob.z_matrix(&v))?,
        pi: Some(DensityOperator::new(prob.pi_matrix(&v))?),
        duality_gap: gap,
        iterations,
    })
}

/// The spectral upper bound d·‖Tr₂|χ_E − χ_π|‖_∞ on the diamond distance.
pub fn spectral_diamond_upper(chi_e: &ChoiMatrix, chi_pi: &ChoiMatrix) -> Result<f64> {
    if chi_e.d_in() != chi_pi.d_in() || chi_e.d_out() != chi_pi.d_out() {
        return Err(Error::DimensionMismatch("Choi matrices of different shapes".into()));
    }
    spectral_diamond_upper_raw(&(chi_e.matrix() - chi_pi.matrix()), chi_e.d_in(), chi_e.d_out())
}

pub(crate) fn spectral_diamond_upper_raw(delta: &CMatrix, d_in: usize, d_out: usize) -> Result<f64> {
    let abs = linalg::matrix_abs(&hermitize(delta))?;
    let tr2 = partial_trace(&abs, &[d_in, d_out], &[0])?;
    Ok(d_in as f64 * lambda_max(&tr2))
}
