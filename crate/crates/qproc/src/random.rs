//! Seeded random generators for states, operators and channels. All
//! randomness in the crate flows through [`SeededRng`] so that runs are
//! reproducible given a seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, hermitize, spectral_norm, CMatrix, CVector};
use crate::states::{ChoiMatrix, DensityOperator};

pub struct SeededRng {
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn gaussian(&mut self) -> f64 {
        // Box-Muller.
        let u1: f64 = self.rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = self.rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn complex_gaussian(&mut self) -> num_complex::Complex64 {
        c(self.gaussian(), self.gaussian())
    }

    /// Ginibre matrix with i.i.d. complex Gaussian entries.
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex_gaussian())
    }

    /// GUE-style random Hermitian matrix, entries O(1).
    pub fn hermitian(&mut self, dim: usize) -> CMatrix {
        hermitize(&self.ginibre(dim, dim))
    }

    /// Random Hermitian rescaled to unit spectral norm.
    pub fn hermitian_unit_spectral(&mut self, dim: usize) -> CMatrix {
        let h = self.hermitian(dim);
        let n = spectral_norm(&h).expect("hermitian by construction");
        if n > 0.0 {
            h.scale(1.0 / n)
        } else {
            h
        }
    }

    /// Haar-ish random pure state.
    pub fn pure_state(&mut self, dim: usize) -> CVector {
        let v = CVector::from_fn(dim, |_, _| self.complex_gaussian());
        let n = v.norm();
        v.scale(1.0 / n)
    }

    /// Full-rank random density operator (Hilbert-Schmidt ensemble).
    pub fn density(&mut self, dim: usize) -> DensityOperator {
        let g = self.ginibre(dim, dim);
        let m = &g * g.adjoint();
        let tr = crate::linalg::trace(&m).re;
        DensityOperator::new(hermitize(&m.scale(1.0 / tr))).expect("Wishart matrix is a state")
    }

    /// Haar random unitary via QR of a Ginibre matrix.
    pub fn unitary(&mut self, dim: usize) -> CMatrix {
        let g = self.ginibre(dim, dim);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        // Fix phases so the distribution is Haar.
        for k in 0..dim {
            let d = r[(k, k)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
            for i in 0..dim {
                q[(i, k)] *= phase;
            }
        }
        q
    }

    /// Random channel from a Haar isometry: Stinespring dilation with an
    /// environment of dimension `env_dim`.
    pub fn channel(&mut self, d: usize, env_dim: usize) -> crate::channels::KrausChannel {
        let u = self.unitary(d * env_dim);
        // Columns with environment input fixed to |0>; Kraus blocks indexed
        // by the environment output.
        let mut ops = Vec::with_capacity(env_dim);
        for e in 0..env_dim {
            let mut a = CMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    // system ⊗ environment ordering, environment second
                    a[(i, j)] = u[(i * env_dim + e, j * env_dim)];
                }
            }
            ops.push(a);
        }
        crate::channels::KrausChannel::new(d, d, ops).expect("isometry gives a CPTP map")
    }

    /// Random Choi matrix (of a random channel) on d ⊗ d.
    pub fn choi(&mut self, d: usize) -> ChoiMatrix {
        let ch = self.channel(d, d);
        crate::channels::choi_from_kraus(&ch).expect("valid channel")
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Random probability vector of the given length.
    pub fn simplex_point(&mut self, len: usize) -> Vec<f64> {
        let mut p: Vec<f64> = (0..len).map(|_| -self.rng.gen_range(f64::EPSILON..1.0f64).ln()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        p
    }
}
