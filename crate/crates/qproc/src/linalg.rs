//! Dense complex linear algebra and multi-subsystem index machinery.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. Composite
//! systems use the usual tensor convention: subsystem 0 is the most
//! significant digit of the row/column index, matching [`kron`]. All
//! partial traces and embeddings take explicit subsystem-dimension lists,
//! so there are no implicit ordering conventions anywhere in the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Kronecker (tensor) product, subsystem `a` most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Maximum entrywise deviation from Hermiticity.
pub fn herm_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// (M + M†)/2. Arithmetic on Hermitian operators drifts off the Hermitian
/// manifold at machine precision; re-symmetrizing keeps eigensolvers and
/// PSD checks stable.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Re Tr(A† B), the Hilbert–Schmidt inner product restricted to Hermitian
/// operators (where it is real).
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    let prod: usize = dims.iter().product();
    if prod != total || dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not factor dimension {total}"
        )));
    }
    Ok(())
}

/// Offsets into a flat index for every multi-index over `sub`, where
/// `sub[k]` is the position (in `dims`) of the k-th local subsystem.
pub(crate) fn subsystem_offsets(dims: &[usize], sub: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let local_dim: usize = sub.iter().map(|&p| dims[p]).product();
    let mut offsets = vec![0usize; local_dim];
    for (idx, off) in offsets.iter_mut().enumerate() {
        let mut rem = idx;
        let mut acc = 0usize;
        for &p in sub.iter().rev() {
            acc += (rem % dims[p]) * strides[p];
            rem /= dims[p];
        }
        *off = acc;
    }
    offsets
}

/// Partial trace of `m` over the subsystems *not* listed in `keep`.
/// Kept subsystems retain their original relative order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(dims, m.nrows())?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch("partial trace of non-square matrix".into()));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "keep set {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let keep_off = subsystem_offsets(dims, &keep);
    let tr_off = subsystem_offsets(dims, &traced);
    let dk = keep_off.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (i, &ri) in keep_off.iter().enumerate() {
        for (j, &rj) in keep_off.iter().enumerate() {
            let mut acc = Complex64::default();
            for &t in &tr_off {
                acc += m[(ri + t, rj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Embed an operator acting on a subset of subsystems into the full space,
/// identity elsewhere. `positions[k]` is the global position of the
/// operator's k-th tensor factor.
pub fn embed(op: &CMatrix, positions: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    let op_dim: usize = positions.iter().map(|&p| dims[p]).product();
    if op.nrows() != op_dim || op.ncols() != op_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, positions {positions:?} require {op_dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
    let op_off = subsystem_offsets(dims, positions);
    let rest_off = subsystem_offsets(dims, &rest);
    let mut out = CMatrix::zeros(total, total);
    for (i, &oi) in op_off.iter().enumerate() {
        for (j, &oj) in op_off.iter().enumerate() {
            let v = op[(i, j)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for &r in &rest_off {
                out[(oi + r, oj + r)] = v;
            }
        }
    }
    Ok(out)
}

/// Apply an operator to a subset of subsystems of a state vector.
pub fn apply_to_vector(op: &CMatrix, positions: &[usize], dims: &[usize], v: &CVector) -> Result<CVector> {
    check_dims(dims, v.len())?;
    let op_dim: usize = positions.iter().map(|&p| dims[p]).product();
    if op.nrows() != op_dim || op.ncols() != op_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, positions {positions:?} require {op_dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
    let op_off = subsystem_offsets(dims, positions);
    let rest_off = subsystem_offsets(dims, &rest);
    let mut out = CVector::zeros(v.len());
    let mut x = vec![Complex64::default(); op_dim];
    for &r in &rest_off {
        for (j, &oj) in op_off.iter().enumerate() {
            x[j] = v[oj + r];
        }
        for (i, &oi) in op_off.iter().enumerate() {
            let mut acc = Complex64::default();
            for (j, xv) in x.iter().enumerate() {
                acc += op[(i, j)] * xv;
            }
            out[oi + r] = acc;
        }
    }
    Ok(out)
}

/// Reorder tensor factors of a square matrix. `new_order[q]` is the old
/// position of the subsystem that ends up at position q.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], new_order: &[usize]) -> Result<CMatrix> {
    check_dims(dims, m.nrows())?;
    if new_order.len() != dims.len() {
        return Err(Error::InvalidArgument("permutation length mismatch".into()));
    }
    let total = m.nrows();
    let new_dims: Vec<usize> = new_order.iter().map(|&o| dims[o]).collect();
    let mut new_strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        new_strides[k] = new_strides[k + 1] * new_dims[k + 1];
    }
    // map[old_index] = new_index
    let mut map = vec![0usize; total];
    for (old, slot) in map.iter_mut().enumerate() {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = old;
        for k in (0..dims.len()).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        *slot = new_order
            .iter()
            .enumerate()
            .map(|(q, &o)| digits[o] * new_strides[q])
            .sum();
    }
    let mut out = CMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian operator: descending eigenvalues and
/// the matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermEigDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl HermEigDecomposition {
    /// Rebuild V diag(f(λ)) V†.
    pub fn map_eigenvalues<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let v = &self.eigenvectors;
        let d = CVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| c(f(l), 0.0)),
        );
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[k];
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|l| l)
    }
}

pub const HERMITICITY_TOL: f64 = 1e-12;

/// Hermitian eigendecomposition with eigenvalues sorted in descending
/// order. Errors when the input is not Hermitian within `1e-12` (absolute,
/// entrywise); the matrix is re-symmetrized before decomposing.
pub fn herm_eig(h: &CMatrix) -> Result<HermEigDecomposition> {
    herm_eig_tol(h, HERMITICITY_TOL)
}

pub fn herm_eig_tol(h: &CMatrix, tol: f64) -> Result<HermEigDecomposition> {
    let dev = herm_deviation(h);
    if !(dev <= tol) {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    let sym = hermitize(h);
    let n = sym.nrows();
    if n == 0 {
        return Ok(HermEigDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let (mut d, mut e, mut q) = herm_tridiagonalize(&sym);
    tql2(&mut d, &mut e, &mut q)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| d[k]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &q.column(src));
    }
    Ok(HermEigDecomposition { eigenvalues, eigenvectors })
}

/// Householder reduction of a Hermitian matrix to real symmetric
/// tridiagonal form: A = Q T Q† with d the diagonal of T and e its
/// subdiagonal (e[i] couples i and i+1; e[n-1] = 0).
fn herm_tridiagonalize(a: &CMatrix) -> (Vec<f64>, Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut q = CMatrix::identity(n, n);
    let mut v = vec![Complex64::default(); n];
    let mut p = vec![Complex64::default(); n];

    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the diagonal.
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += m[(i, k)].norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm <= f64::MIN_POSITIVE {
            m[(k + 1, k)] = Complex64::default();
            m[(k, k + 1)] = Complex64::default();
            continue;
        }
        let x0 = m[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut vnorm2 = 0.0;
        for i in k + 1..n {
            let vi = if i == k + 1 { m[(i, k)] - alpha } else { m[(i, k)] };
            v[i] = vi;
            vnorm2 += vi.norm_sqr();
        }
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let inv = 1.0 / vnorm2.sqrt();
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi *= inv;
        }

        // Two-sided update of the trailing block: A ← A - w v† - v w†
        // with p = A v, K = v† p, w = 2(p - K v).
        let mut kacc = Complex64::default();
        for i in k + 1..n {
            let mut acc = Complex64::default();
            for j in k + 1..n {
                acc += m[(i, j)] * v[j];
            }
            p[i] = acc;
            kacc += v[i].conj() * acc;
        }
        for i in k + 1..n {
            p[i] = (p[i] - v[i] * kacc) * 2.0;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let delta = p[i] * v[j].conj() + v[i] * p[j].conj();
                m[(i, j)] -= delta;
            }
        }
        m[(k + 1, k)] = alpha;
        m[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            m[(i, k)] = Complex64::default();
            m[(k, i)] = Complex64::default();
        }

        // Q ← Q (I - 2 v v†).
        for r in 0..n {
            let mut acc = Complex64::default();
            for i in k + 1..n {
                acc += q[(r, i)] * v[i];
            }
            acc *= 2.0;
            for i in k + 1..n {
                q[(r, i)] -= acc * v[i].conj();
            }
        }
    }

    // Phase-rotate so the subdiagonal is real non-negative.
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    let mut u = Complex64::new(1.0, 0.0);
    for i in 0..n {
        d[i] = m[(i, i)].re;
        if i + 1 < n {
            let beta = m[(i + 1, i)];
            let mag = beta.norm();
            let next_u = if mag > 0.0 { (beta * u) / mag } else { u };
            // column i+1 of Q absorbs the phase
            for r in 0..n {
                let val = q[(r, i + 1)] * next_u;
                q[(r, i + 1)] = val;
            }
            e[i] = mag;
            u = next_u;
        }
    }
    (d, e, q)
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix,
/// accumulating the rotations into the (complex) column basis `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut CMatrix) -> Result<()> {
    let n = d.len();
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= f64::EPSILON * tst1 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut cc) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = cc * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                cc = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * cc * b;
                p = s * r;
                d[i + 1] = g + p;
                g = cc * r - b;
                for k in 0..z.nrows() {
                    f = z[(k, i + 1)].re;
                    let fi = z[(k, i + 1)].im;
                    let zr = z[(k, i)].re;
                    let zi = z[(k, i)].im;
                    z[(k, i + 1)] = Complex64::new(s * zr + cc * f, s * zi + cc * fi);
                    z[(k, i)] = Complex64::new(cc * zr - s * f, cc * zi - s * fi);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Relative spectral cutoff used for support-restricted matrix functions.
pub const DEFAULT_SUPPORT_CUTOFF: f64 = 1e-10;

/// Spectral application of a scalar function to a Hermitian operator.
/// Eigenvalues with |λ| at or below `support_cutoff · max|λ|` are mapped to
/// zero, so functions like x^{-1/2} act only on the support.
pub fn mat_func_psd<F: Fn(f64) -> f64>(h: &CMatrix, f: F, support_cutoff: f64) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let thr = support_cutoff * lam_max;
    Ok(eig.map_eigenvalues(|l| if l.abs() <= thr { 0.0 } else { f(l) }))
}

/// Principal square root on the support of a (numerically) PSD operator.
pub fn sqrt_psd(h: &CMatrix) -> Result<CMatrix> {
    mat_func_psd(h, |l| l.max(0.0).sqrt(), DEFAULT_SUPPORT_CUTOFF)
}

/// Inverse square root restricted to the support.
pub fn inv_sqrt_psd(h: &CMatrix) -> Result<CMatrix> {
    mat_func_psd(h, |l| 1.0 / l.max(0.0).sqrt(), DEFAULT_SUPPORT_CUTOFF)
}

/// |H| = √(H²) for Hermitian H.
pub fn matrix_abs(h: &CMatrix) -> Result<CMatrix> {
    mat_func_psd(h, f64::abs, 0.0)
}

/// Operator sign function with sign(0) = 0; eigenvalues below
/// `zero_tol` in magnitude are treated as zero.
pub fn sign_herm(h: &CMatrix, zero_tol: f64) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    Ok(eig.map_eigenvalues(|l| {
        if l.abs() <= zero_tol {
            0.0
        } else {
            l.signum()
        }
    }))
}

/// Σ|λ_i| for Hermitian input.
pub fn trace_norm(h: &CMatrix) -> Result<f64> {
    let eig = herm_eig(h)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Largest |eigenvalue| of a Hermitian operator.
pub fn spectral_norm(h: &CMatrix) -> Result<f64> {
    let eig = herm_eig(h)?;
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs())))
}

/// e^{iθH} for Hermitian H.
pub fn unitary_exp(h: &CMatrix, theta: f64) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::from_polar(1.0, theta * eig.eigenvalues[k]);
    }
    Ok(scaled * v.adjoint())
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let g = u.adjoint() * u;
    let id = identity(u.nrows());
    frobenius_norm(&(g - id)) <= tol * (u.nrows() as f64).sqrt()
}

/// All entries finite (no NaN/Inf).
pub fn entries_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
