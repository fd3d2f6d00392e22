//! Channel-simulation cost functions against a fixed target Choi matrix:
//! trace distance C₁, infidelity C_F, smoothed trace distance C_μ,
//! relative entropy C_R, Schatten C_p and the diamond distance C_⋄, with
//! analytic subgradients where the optimizers need them.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, herm_eig, hermitize, mat_func_psd, sign_herm, sqrt_psd, CMatrix,
};
use crate::processors::ProcessorMap;
use crate::sdp;
use crate::states::{
    fidelity_raw, relative_entropy, ChoiMatrix, DensityOperator, HermitianOperator,
};

/// Eigenvalues below this magnitude count as zero in the trace-distance
/// subgradient (sign(0) = 0).
pub const SIGN_ZERO_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostKind {
    /// C₁(π) = ‖χ_E − Λ(π)‖₁
    Trace,
    /// C_F(π) = 1 − F(χ_E, Λ(π))²
    Infidelity,
    /// C_μ(π) = Tr h_μ(Λ(π) − χ_E), Huber-smoothed trace distance
    SmoothTrace { mu: f64 },
    /// C_R(π) = min{S(χ_E‖χ_π), S(χ_π‖χ_E)} (evaluation only)
    RelEntropy,
    /// C_p(π) = ‖χ_E − Λ(π)‖_p (evaluation only)
    Schatten { p: f64 },
    /// C_⋄(π) via the diamond-norm SDP (evaluation only)
    Diamond { tol: f64 },
}

impl CostKind {
    pub fn name(&self) -> &'static str {
        match self {
            CostKind::Trace => "trace",
            CostKind::Infidelity => "infidelity",
            CostKind::SmoothTrace { .. } => "smooth_trace",
            CostKind::RelEntropy => "rel_entropy",
            CostKind::Schatten { .. } => "schatten",
            CostKind::Diamond { .. } => "diamond",
        }
    }

    pub fn differentiable(&self) -> bool {
        matches!(
            self,
            CostKind::Trace | CostKind::Infidelity | CostKind::SmoothTrace { .. }
        )
    }
}

/// Huber penalty h_μ: quadratic for |x| < μ, linear beyond.
pub fn huber(mu: f64, x: f64) -> f64 {
    if x.abs() < mu {
        x * x / (2.0 * mu)
    } else {
        x.abs() - mu / 2.0
    }
}

/// Derivative of the Huber penalty.
pub fn huber_prime(mu: f64, x: f64) -> f64 {
    if x.abs() < mu {
        x / mu
    } else {
        x.signum()
    }
}

/// A cost function C(π) for a fixed processor and target, with
/// (sub)gradients for the differentiable kinds.
pub struct CostFunction {
    processor: Arc<ProcessorMap>,
    target: ChoiMatrix,
    kind: CostKind,
    sqrt_target: CMatrix,
    /// For a rank-one (unitary) target the infidelity gradient is the
    /// constant −Λ*[χ_E], independent of the program.
    pure_target_grad: Option<CMatrix>,
}

fn check_compatible(processor: &ProcessorMap, target: &ChoiMatrix) -> Result<()> {
    if processor.choi_d_in() != target.d_in() || processor.choi_d_out() != target.d_out() {
        return Err(Error::DimensionMismatch(format!(
            "processor produces a {}x{} Choi matrix, target is {}x{}",
            processor.choi_d_in(),
            processor.choi_d_out(),
            target.d_in(),
            target.d_out()
        )));
    }
    Ok(())
}

impl CostFunction {
    pub fn new(processor: Arc<ProcessorMap>, target: ChoiMatrix, kind: CostKind) -> Result<Self> {
        check_compatible(&processor, &target)?;
        match kind {
            CostKind::SmoothTrace { mu } if mu <= 0.0 => {
                return Err(Error::InvalidArgument(format!(
                    "smoothing parameter must be positive, got {mu}"
                )));
            }
            CostKind::Schatten { p } if !(p >= 1.0) => {
                return Err(Error::InvalidArgument(format!(
                    "Schatten cost requires p >= 1, got {p}"
                )));
            }
            CostKind::Diamond { tol } if tol <= 0.0 => {
                return Err(Error::InvalidArgument("diamond tolerance must be positive".into()));
            }
            _ => {}
        }
        let sqrt_target = sqrt_psd(target.matrix())?;
        let pure_target_grad = if matches!(kind, CostKind::Infidelity) {
            let eig = herm_eig(target.matrix())?;
            if eig.eigenvalues.len() > 1 && eig.eigenvalues[1].abs() <= 1e-12 {
                Some(hermitize(&processor.dual_raw(target.matrix())?).scale(-1.0))
            } else {
                None
            }
        } else {
            None
        };
        Ok(Self { processor, target, kind, sqrt_target, pure_target_grad })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn processor(&self) -> &Arc<ProcessorMap> {
        &self.processor
    }

    pub fn target(&self) -> &ChoiMatrix {
        &self.target
    }

    /// Lipschitz constant d/μ of the smoothed-trace gradient (d the
    /// program dimension); None for the other kinds.
    pub fn lipschitz(&self) -> Option<f64> {
        match self.kind {
            CostKind::SmoothTrace { mu } => Some(self.processor.program_dim() as f64 / mu),
            _ => None,
        }
    }

    pub fn eval(&self, pi: &DensityOperator) -> Result<f64> {
        self.eval_herm(pi.matrix())
    }

    /// Cost at an arbitrary Hermitian argument (Λ extended linearly);
    /// the entropic kind still requires a state.
    pub fn eval_herm(&self, x: &CMatrix) -> Result<f64> {
        let chi_pi = hermitize(&self.processor.apply_raw(x)?);
        let delta = hermitize(&(&chi_pi - self.target.matrix()));
        match self.kind {
            CostKind::Trace => linalg::trace_norm(&delta),
            CostKind::Infidelity => {
                let f = fidelity_raw(self.target.matrix(), &chi_pi)?;
                Ok(1.0 - f * f)
            }
            CostKind::SmoothTrace { mu } => {
                let eig = herm_eig(&delta)?;
                Ok(eig.eigenvalues.iter().map(|&l| huber(mu, l)).sum())
            }
            CostKind::RelEntropy => {
                let rho = DensityOperator::new(chi_pi)
                    .map_err(|e| Error::InvalidArgument(format!("Λ(π) is not a state: {e}")))?;
                let a = relative_entropy(self.target.density(), &rho)?;
                let b = relative_entropy(&rho, self.target.density())?;
                Ok(a.min(b))
            }
            CostKind::Schatten { p } => {
                crate::states::schatten_p_norm(&HermitianOperator::new(delta)?, p)
            }
            CostKind::Diamond { tol } => {
                let omega = HermitianOperator::new(self.target.matrix() - &chi_pi)?;
                let sol = sdp::diamond_distance(&omega, self.target.d_in(), tol)?;
                Ok(sol.objective)
            }
        }
    }

    pub fn grad(&self, pi: &DensityOperator) -> Result<CMatrix> {
        self.grad_herm(pi.matrix())
    }

    /// Analytic (sub)gradient at an arbitrary Hermitian argument.
    /// Returns an error for the evaluation-only kinds.
    pub fn grad_herm(&self, x: &CMatrix) -> Result<CMatrix> {
        let chi_pi = hermitize(&self.processor.apply_raw(x)?);
        match self.kind {
            CostKind::Trace => {
                // ∇C₁ = Λ*[sign(χ_π − χ_E)], sign(0) := 0.
                let delta = hermitize(&(&chi_pi - self.target.matrix()));
                let sgn = sign_herm(&delta, SIGN_ZERO_TOL)?;
                Ok(hermitize(&self.processor.dual_raw(&sgn)?))
            }
            CostKind::Infidelity => {
                // For unitary targets ∇C_F = −Λ*[|χ_U⟩⟨χ_U|], independent
                // of the program.
                if let Some(g) = &self.pure_target_grad {
                    return Ok(g.clone());
                }
                // ∇C_F = −2F ∇F, ∇F = ½Λ*[√χ_E (√χ_E χ_π √χ_E)^{-1/2} √χ_E].
                let s = &self.sqrt_target;
                let m = hermitize(&(s * &chi_pi * s));
                let m_inv_sqrt = mat_func_psd(
                    &m,
                    |l| 1.0 / l.max(0.0).sqrt(),
                    linalg::DEFAULT_SUPPORT_CUTOFF,
                )?;
                let core = hermitize(&(s * m_inv_sqrt * s));
                let grad_f = hermitize(&self.processor.dual_raw(&core)?).scale(0.5);
                let f = fidelity_raw(self.target.matrix(), &chi_pi)?;
                Ok(grad_f.scale(-2.0 * f))
            }
            CostKind::SmoothTrace { mu } => {
                let delta = hermitize(&(&chi_pi - self.target.matrix()));
                let hprime = mat_func_psd(&delta, |l| huber_prime(mu, l), 0.0)?;
                Ok(hermitize(&self.processor.dual_raw(&hprime)?))
            }
            _ => Err(Error::NoGradient(self.kind.name())),
        }
    }
}

pub fn trace_cost(processor: Arc<ProcessorMap>, target: ChoiMatrix) -> Result<CostFunction> {
    CostFunction::new(processor, target, CostKind::Trace)
}

pub fn infidelity_cost(processor: Arc<ProcessorMap>, target: ChoiMatrix) -> Result<CostFunction> {
    CostFunction::new(processor, target, CostKind::Infidelity)
}

pub fn smooth_trace_cost(
    processor: Arc<ProcessorMap>,
    target: ChoiMatrix,
    mu: f64,
) -> Result<CostFunction> {
    CostFunction::new(processor, target, CostKind::SmoothTrace { mu })
}

pub fn rel_entropy_cost(processor: Arc<ProcessorMap>, target: ChoiMatrix) -> Result<CostFunction> {
    CostFunction::new(processor, target, CostKind::RelEntropy)
}

pub fn schatten_cost(
    processor: Arc<ProcessorMap>,
    target: ChoiMatrix,
    p: f64,
) -> Result<CostFunction> {
    CostFunction::new(processor, target, CostKind::Schatten { p })
}

pub fn diamond_cost(
    processor: Arc<ProcessorMap>,
    target: ChoiMatrix,
    tol: f64,
) -> Result<CostFunction> {
    CostFunction::new(processor, target, CostKind::Diamond { tol })
}

/// Distance bounds at a given program, all derivable without running the
/// diamond SDP itself.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    /// C₁ = ‖χ_E − χ_π‖₁.
    pub c1: f64,
    /// Fuchs–van de Graaf bound 2√C_F ≥ C₁.
    pub cf_bound: f64,
    /// Pinsker bound √(2 ln2 · C_R) ≥ C₁; None when C_R = ∞.
    pub pinsker_bound: Option<f64>,
    /// C₁ ≤ C_⋄.
    pub diamond_lower: f64,
    /// C_⋄ ≤ d·C₁.
    pub diamond_upper: f64,
    /// C_⋄ ≤ d‖Tr₂|χ_E − χ_π|‖_∞.
    pub spectral_upper: f64,
}

pub fn bound_report(
    processor: &ProcessorMap,
    target: &ChoiMatrix,
    pi: &DensityOperator,
) -> Result<BoundReport> {
    check_compatible(processor, target)?;
    let chi_pi = hermitize(&processor.apply_raw(pi.matrix())?);
    let delta = hermitize(&(target.matrix() - &chi_pi));
    let c1 = linalg::trace_norm(&delta)?;

    let f = fidelity_raw(target.matrix(), &chi_pi)?;
    let cf = 1.0 - f * f;
    let cf_bound = 2.0 * cf.max(0.0).sqrt();

    let chi_pi_state = DensityOperator::new(chi_pi)?;
    let s_a = relative_entropy(target.density(), &chi_pi_state)?;
    let s_b = relative_entropy(&chi_pi_state, target.density())?;
    let cr = s_a.min(s_b);
    let pinsker_bound = if cr.is_finite() {
        Some((2.0 * std::f64::consts::LN_2 * cr).sqrt())
    } else {
        None
    };

    let spectral_upper = sdp::spectral_diamond_upper_raw(&delta, target.d_in(), target.d_out())?;
    Ok(BoundReport {
        c1,
        cf_bound,
        pinsker_bound,
        diamond_lower: c1,
        diamond_upper: target.d_in() as f64 * c1,
        spectral_upper,
    })
}
