//! Optimization and learning of program states for programmable quantum
//! processors.
//!
//! A programmable processor applies a fixed joint operation to an input
//! state and a *program* state; varying the program selects which channel
//! the processor enacts. Finding the program whose simulated channel is
//! closest to a target channel is a convex problem over density matrices.
//! This crate provides the pieces needed to solve it numerically:
//!
//! * [`linalg`] / [`states`] / [`channels`] — dense complex linear algebra,
//!   quantum-state primitives and a small channel zoo (Choi and Kraus
//!   representations, norms, fidelity, relative entropy).
//! * [`processors`] — concrete processor maps Λ (and duals Λ*) for the
//!   teleportation, port-based teleportation (full and reduced) and
//!   parametric-quantum-circuit designs.
//! * [`costs`] — cost functions C₁, C_F, C_μ, C_R, C_p, C_⋄ against a fixed
//!   target Choi matrix, with analytic subgradients.
//! * [`sdp`] — a log-barrier interior-point solver for the diamond-norm
//!   program and the joint optimal-program search.
//! * [`optim`] — projected subgradient, Frank–Wolfe variants, stochastic
//!   smoothing and the closed-form optimum for unitary targets.
//! * [`io`] — JSON/CSV exchange formats used by the CLI.

pub mod channels;
pub mod costs;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod processors;
pub mod random;
pub mod sdp;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
