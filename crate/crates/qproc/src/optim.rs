//! Gradient-based learners over program-state space: simplex and
//! density-operator projections, projected subgradient, Frank–Wolfe (fixed
//! rate, exact line search, stochastic smoothing) and the closed-form
//! optimum for unitary targets.

use std::time::Instant;

use crate::costs::CostFunction;
use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, hermitize, identity, CMatrix, CVector};
use crate::processors::ProcessorMap;
use crate::random::SeededRng;
use crate::states::{DensityOperator, HermitianOperator};

/// Learning-rate schedules. `FwClassic` is the 2/(i+2) Frank–Wolfe rate.
/// `Geometric` decays as a₀ρ^k; diminishing-only rates leave a residual
/// oscillation floor of order α_k on polyhedral objectives, while a
/// geometric tail converges linearly when the minimum is sharp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// α_k = c/√k
    InvSqrt { c: f64 },
    /// α_k = a/(b+k)
    Harmonic { a: f64, b: f64 },
    /// α_i = 2/(i+2)
    FwClassic,
    /// α_k = a0·rho^k
    Geometric { a0: f64, rho: f64 },
}

impl Schedule {
    pub fn rate(&self, k: usize) -> f64 {
        match self {
            Schedule::InvSqrt { c } => c / (k as f64).sqrt(),
            Schedule::Harmonic { a, b } => a / (b + k as f64),
            Schedule::FwClassic => 2.0 / (k as f64 + 2.0),
            Schedule::Geometric { a0, rho } => a0 * rho.powi(k as i32),
        }
    }
}

/// Constraint set the iterates must stay inside.
#[derive(Clone)]
pub enum Constraint {
    /// All density operators on the program space.
    FullStates,
    /// Mixtures diagonal in a fixed orthonormal basis.
    ClassicalDiagonal(ClassicalProgramBasis),
    /// Choi-like programs {χ : Tr_B χ = I/d}.
    ChoiSet { d: usize },
}

/// An orthonormal basis defining the classical (diagonal) program set.
#[derive(Clone)]
pub struct ClassicalProgramBasis {
    vectors: Vec<CVector>,
}

impl ClassicalProgramBasis {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidArgument("basis must be square".into()));
        }
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let ip = u.dotc(v);
                let expect = if i == j { 1.0 } else { 0.0 };
                if (ip.re - expect).abs() > 1e-10 || ip.im.abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "basis vectors {i},{j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { vectors })
    }

    /// Computational basis of the given dimension.
    pub fn computational(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|i| {
                let mut v = CVector::zeros(dim);
                v[i] = linalg::c(1.0, 0.0);
                v
            })
            .collect();
        Self { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    /// Σ λ_i |φ_i⟩⟨φ_i| for a weight vector λ.
    pub fn mixture(&self, weights: &[f64]) -> Result<DensityOperator> {
        if weights.len() != self.dim() {
            return Err(Error::DimensionMismatch("weight count != basis size".into()));
        }
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, v) in weights.iter().zip(&self.vectors) {
            m += (v * v.adjoint()).scale(*w);
        }
        DensityOperator::new(hermitize(&m))
    }

    /// Diagonal of an operator in this basis.
    pub fn diagonal(&self, m: &CMatrix) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| (v.adjoint() * m * v)[(0, 0)].re)
            .collect()
    }
}

#[derive(Clone)]
pub struct OptimizerConfig {
    pub iterations: usize,
    pub schedule: Schedule,
    pub seed: u64,
    pub constraint: Constraint,
    /// η scale of the stochastic-smoothing perturbations (η_k = scale/√k).
    pub smoothing_eta_scale: f64,
    /// Stop early when best_cost improves by less than 1e-10 over 50
    /// iterations.
    pub early_stop: bool,
    /// Record the program at every iteration (used by convergence tests).
    pub keep_iterates: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            schedule: Schedule::Harmonic { a: 1.0, b: 10.0 },
            seed: 0,
            constraint: Constraint::FullStates,
            smoothing_eta_scale: 1.0,
            early_stop: false,
            keep_iterates: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterRecord {
    pub iter: usize,
    pub cost: f64,
    pub step_norm: f64,
    pub wall_ms: f64,
}

/// Per-iteration log of an optimization run plus the best program seen.
pub struct OptimizerTrace {
    pub records: Vec<IterRecord>,
    pub best_cost: f64,
    pub best_program: DensityOperator,
    pub iterates: Vec<DensityOperator>,
}

impl OptimizerTrace {
    /// CSV with the mandatory header `iter,cost,step_norm,wall_ms`.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,cost,step_norm,wall_ms")?;
        for r in &self.records {
            writeln!(w, "{},{:.12e},{:.12e},{:.3}", r.iter, r.cost, r.step_norm, r.wall_ms)?;
        }
        Ok(())
    }

    /// CSV without the wall-clock column, byte-identical across runs with
    /// the same seed.
    pub fn to_csv_deterministic<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,cost,step_norm")?;
        for r in &self.records {
            writeln!(w, "{},{:.12e},{:.12e}", r.iter, r.cost, r.step_norm)?;
        }
        Ok(())
    }
}

/// Euclidean projection onto the probability simplex.
pub fn simplex_project(x: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cum += v;
        let cand = (cum - 1.0) / (k + 1) as f64;
        if v - cand > 0.0 {
            theta = cand;
        }
    }
    x.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Closest density operator in Frobenius norm: diagonalize and project the
/// eigenvalues onto the simplex.
pub fn project_to_states(x: &HermitianOperator) -> DensityOperator {
    let eig = x.eig();
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let proj = simplex_project(&lam);
    let v = &eig.eigenvectors;
    let mut m = CMatrix::zeros(x.dim(), x.dim());
    for (k, &p) in proj.iter().enumerate() {
        if p > 0.0 {
            let col = v.column(k);
            m += (col * col.adjoint()).scale(p);
        }
    }
    DensityOperator::new(hermitize(&m)).expect("projection output is a state")
}

/// Dykstra alternating projection onto {states} ∩ {Tr_B χ = I/d}.
pub fn project_to_choi_set(x: &HermitianOperator, d: usize, tol: f64) -> Result<DensityOperator> {
    let dim = x.dim();
    if dim % d != 0 {
        return Err(Error::DimensionMismatch(format!(
            "operator of dim {dim} is not on {d}⊗k"
        )));
    }
    let d_b = dim / d;
    let dims = [d, d_b];
    let max_sweeps = 10_000;

    let mut y = x.matrix().clone();
    let mut p_inc = CMatrix::zeros(dim, dim);
    let mut q_inc = CMatrix::zeros(dim, dim);
    let mut prev = y.clone();
    for sweep in 0..max_sweeps {
        // Affine projection: add ((I/d − Tr_B y)/d_B) ⊗ I.
        let w = &y + &q_inc;
        let marginal = linalg::partial_trace(&w, &dims, &[0])?;
        let corr = (identity(d).scale(1.0 / d as f64) - marginal).scale(1.0 / d_b as f64);
        let affine = &w + corr.kronecker(&identity(d_b));
        q_inc = w - &affine;

        // Spectrahedron projection.
        let z = &affine + &p_inc;
        let proj = project_to_states(&HermitianOperator::new(hermitize(&z))?);
        p_inc = z - proj.matrix();
        y = proj.matrix().clone();

        let change = linalg::frobenius_norm(&(&y - &prev));
        if sweep > 0 && change < tol {
            let marg_err = linalg::frobenius_norm(
                &(linalg::partial_trace(&y, &dims, &[0])? - identity(d).scale(1.0 / d as f64)),
            );
            if marg_err < 10.0 * tol.max(1e-12) {
                // Final affine touch-up keeps both constraints within tol.
                let marginal = linalg::partial_trace(&y, &dims, &[0])?;
                let corr =
                    (identity(d).scale(1.0 / d as f64) - marginal).scale(1.0 / d_b as f64);
                let fixed = &y + corr.kronecker(&identity(d_b));
                return DensityOperator::new(hermitize(&fixed));
            }
        }
        prev = y.clone();
    }
    Err(Error::NonConvergence(format!(
        "Dykstra projection did not converge in {max_sweeps} sweeps"
    )))
}

fn check_feasible(pi: &DensityOperator, constraint: &Constraint) -> Result<()> {
    match constraint {
        Constraint::FullStates => Ok(()),
        Constraint::ClassicalDiagonal(basis) => {
            if basis.dim() != pi.dim() {
                return Err(Error::DimensionMismatch("basis/init dimension mismatch".into()));
            }
            let diag = basis.mixture(&basis.diagonal(pi.matrix()))?;
            if linalg::frobenius_norm(&(diag.matrix() - pi.matrix())) > 1e-9 {
                return Err(Error::InvalidArgument(
                    "initial program is not diagonal in the classical basis".into(),
                ));
            }
            Ok(())
        }
        Constraint::ChoiSet { d } => {
            let dims = [*d, pi.dim() / *d];
            let marg = linalg::partial_trace(pi.matrix(), &dims, &[0])?;
            if linalg::frobenius_norm(&(marg - identity(*d).scale(1.0 / *d as f64))) > 1e-8 {
                return Err(Error::InvalidArgument(
                    "initial program is not in the Choi set".into(),
                ));
            }
            Ok(())
        }
    }
}

struct RunState {
    records: Vec<IterRecord>,
    best_cost: f64,
    best_program: DensityOperator,
    iterates: Vec<DensityOperator>,
    started: Instant,
    last_best_update: usize,
}

impl RunState {
    fn new(init: &DensityOperator) -> Self {
        Self {
            records: Vec::new(),
            best_cost: f64::INFINITY,
            best_program: init.clone(),
            iterates: Vec::new(),
            started: Instant::now(),
            last_best_update: 0,
        }
    }

    fn record(
        &mut self,
        iter: usize,
        cost: f64,
        step_norm: f64,
        program: &DensityOperator,
        keep: bool,
    ) {
        if cost < self.best_cost - 1e-10 {
            self.last_best_update = iter;
        }
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_program = program.clone();
        }
        self.records.push(IterRecord {
            iter,
            cost,
            step_norm,
            wall_ms: self.started.elapsed().as_secs_f64() * 1e3,
        });
        if keep {
            self.iterates.push(program.clone());
        }
    }

    fn should_stop(&self, iter: usize, early: bool) -> bool {
        early && iter >= 50 && iter - self.last_best_update >= 50
    }

    fn finish(self) -> OptimizerTrace {
        OptimizerTrace {
            records: self.records,
            best_cost: self.best_cost,
            best_program: self.best_program,
            iterates: self.iterates,
        }
    }
}

/// Projected subgradient method: π ← P(π − α_k g_k) with P the projection
/// onto the configured constraint set. The best iterate is tracked; the
/// recorded best program is the method's output since subgradient steps
/// are not monotone.
pub fn projected_subgradient(
    cost: &CostFunction,
    init: &DensityOperator,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    check_feasible(init, &cfg.constraint)?;
    let mut state = RunState::new(init);
    let mut pi = init.clone();
    // Classical mode walks on the weight vector directly.
    let mut weights: Option<Vec<f64>> = match &cfg.constraint {
        Constraint::ClassicalDiagonal(basis) => Some(basis.diagonal(init.matrix())),
        _ => None,
    };
    state.record(0, cost.eval(&pi)?, 0.0, &pi, cfg.keep_iterates);
    for k in 1..=cfg.iterations {
        let alpha = cfg.schedule.rate(k);
        let g = cost.grad(&pi)?;
        let next = match &cfg.constraint {
            Constraint::FullStates => {
                let step = pi.matrix() - g.scale(alpha);
                project_to_states(&HermitianOperator::new(hermitize(&step))?)
            }
            Constraint::ClassicalDiagonal(basis) => {
                let w = weights.as_mut().expect("classical mode carries weights");
                let gd = basis.diagonal(&g);
                let moved: Vec<f64> =
                    w.iter().zip(&gd).map(|(wi, gi)| wi - alpha * gi).collect();
                *w = simplex_project(&moved);
                basis.mixture(w)?
            }
            Constraint::ChoiSet { d } => {
                let step = pi.matrix() - g.scale(alpha);
                project_to_choi_set(&HermitianOperator::new(hermitize(&step))?, *d, 1e-10)?
            }
        };
        let step_norm = linalg::frobenius_norm(&(next.matrix() - pi.matrix()));
        pi = next;
        state.record(k, cost.eval(&pi)?, step_norm, &pi, cfg.keep_iterates);
        if state.should_stop(k, cfg.early_stop) {
            break;
        }
    }
    Ok(state.finish())
}

fn smallest_eig_state(g: &CMatrix) -> Result<DensityOperator> {
    let eig = herm_eig(g)?;
    let v = eig.eigenvectors.column(eig.eigenvalues.len() - 1);
    DensityOperator::new(hermitize(&(v * v.adjoint())))
}

fn require_differentiable(cost: &CostFunction) -> Result<()> {
    match cost.kind() {
        crate::costs::CostKind::Infidelity | crate::costs::CostKind::SmoothTrace { .. } => Ok(()),
        k => Err(Error::NoGradient(k.name())),
    }
}

/// Frank–Wolfe with the classic 2/(i+2) rate: every iterate is an exact
/// convex combination of states, so no projection is needed.
pub fn frank_wolfe(
    cost: &CostFunction,
    init: &DensityOperator,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    require_differentiable(cost)?;
    let mut state = RunState::new(init);
    let mut pi = init.clone();
    state.record(0, cost.eval(&pi)?, 0.0, &pi, cfg.keep_iterates);
    for i in 1..=cfg.iterations {
        let g = cost.grad(&pi)?;
        let vertex = smallest_eig_state(&g)?;
        let gamma = 2.0 / (i as f64 + 2.0);
        let next = DensityOperator::new(hermitize(
            &(pi.matrix().scale(1.0 - gamma) + vertex.matrix().scale(gamma)),
        ))?;
        let step_norm = linalg::frobenius_norm(&(next.matrix() - pi.matrix()));
        pi = next;
        state.record(i, cost.eval(&pi)?, step_norm, &pi, cfg.keep_iterates);
        if state.should_stop(i, cfg.early_stop) {
            break;
        }
    }
    Ok(state.finish())
}

/// Frank–Wolfe with exact line search (golden section, 40 evaluations)
/// along the segment toward the minimizing vertex; the cost sequence is
/// non-increasing.
pub fn frank_wolfe_linesearch(
    cost: &CostFunction,
    init: &DensityOperator,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    require_differentiable(cost)?;
    let mut state = RunState::new(init);
    let mut pi = init.clone();
    let mut current = cost.eval(&pi)?;
    state.record(0, current, 0.0, &pi, cfg.keep_iterates);
    for i in 1..=cfg.iterations {
        let g = cost.grad(&pi)?;
        let vertex = smallest_eig_state(&g)?;
        let eval_at = |alpha: f64| -> Result<f64> {
            cost.eval_herm(
                &(pi.matrix().scale(1.0 - alpha) + vertex.matrix().scale(alpha)),
            )
        };
        let alpha = golden_section_min(&eval_at, 40)?;
        let cand = eval_at(alpha)?;
        let (alpha, value) = if cand <= current { (alpha, cand) } else { (0.0, current) };
        let next = DensityOperator::new(hermitize(
            &(pi.matrix().scale(1.0 - alpha) + vertex.matrix().scale(alpha)),
        ))?;
        let step_norm = linalg::frobenius_norm(&(next.matrix() - pi.matrix()));
        pi = next;
        current = value;
        state.record(i, current, step_norm, &pi, cfg.keep_iterates);
        if state.should_stop(i, cfg.early_stop) {
            break;
        }
    }
    Ok(state.finish())
}

fn golden_section_min<F: Fn(f64) -> Result<f64>>(f: &F, evals: usize) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..evals.saturating_sub(2) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok((a + b) / 2.0)
}

/// Frank–Wolfe on a stochastically smoothed subgradient: at iteration k
/// the subgradient is averaged over k Hermitian perturbations of spectral
/// norm one, scaled by η_k ∝ k^{-1/2}. Deterministic given the seed.
pub fn stochastic_smoothing_fw(
    cost: &CostFunction,
    init: &DensityOperator,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    let mut rng = SeededRng::new(cfg.seed);
    let mut state = RunState::new(init);
    let mut pi = init.clone();
    let dim = init.dim();
    state.record(0, cost.eval(&pi)?, 0.0, &pi, cfg.keep_iterates);
    for k in 1..=cfg.iterations {
        let eta = cfg.smoothing_eta_scale / (k as f64).sqrt();
        let mut avg = CMatrix::zeros(dim, dim);
        for _ in 0..k {
            let sigma = rng.hermitian_unit_spectral(dim);
            let arg = pi.matrix() + sigma.scale(eta);
            avg += cost.grad_herm(&arg)?;
        }
        let avg = avg.scale(1.0 / k as f64);
        let vertex = smallest_eig_state(&hermitize(&avg))?;
        let gamma = 2.0 / (k as f64 + 2.0);
        let next = DensityOperator::new(hermitize(
            &(pi.matrix().scale(1.0 - gamma) + vertex.matrix().scale(gamma)),
        ))?;
        let step_norm = linalg::frobenius_norm(&(next.matrix() - pi.matrix()));
        pi = next;
        state.record(k, cost.eval(&pi)?, step_norm, &pi, cfg.keep_iterates);
        if state.should_stop(k, cfg.early_stop) {
            break;
        }
    }
    Ok(state.finish())
}

/// Closed-form optimal program for a unitary target under the fidelity
/// cost: the top eigenvector of Λ*[|χ_U⟩⟨χ_U|], with the achieved
/// fidelity √⟨χ_U|Λ(π̃)|χ_U⟩.
pub fn unitary_optimal_program(
    processor: &ProcessorMap,
    u: &CMatrix,
) -> Result<(DensityOperator, f64)> {
    let d = processor.choi_d_in();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "unitary must act on the processor input dimension {d}"
        )));
    }
    if !linalg::is_unitary(u, 1e-10) {
        return Err(Error::InvalidArgument("target is not unitary".into()));
    }
    let chi = crate::channels::unitary_choi(u)?;
    // Smallest eigenvector of −Λ*[|χ_U⟩⟨χ_U|]: the same computation the
    // Frank–Wolfe iteration performs, so both resolve a degenerate top
    // eigenspace identically.
    let g = hermitize(&processor.dual_raw(chi.matrix())?).scale(-1.0);
    let pi = smallest_eig_state(&g)?;
    let chi_pi = processor.apply_raw(pi.matrix())?;
    let phi = crate::states::max_entangled(d)?;
    let chi_u = linalg::kron(&identity(d), u) * phi;
    let overlap = (chi_u.adjoint() * chi_pi * &chi_u)[(0, 0)].re;
    Ok((pi, overlap.max(0.0).sqrt()))
}
