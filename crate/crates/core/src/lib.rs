//! Lie operator splitting for the semilinear heat equation
//!
//! ```text
//! ∂ₜu = Δu + λ|u|^{p-1}u   in Ω,    u = 0 on ∂Ω,
//! ```
//!
//! discretized with continuous piecewise-linear finite elements on
//! structured simplicial meshes in two and three dimensions. One time step
//! applies the exact flow of the pointwise ODE `w' = λ|w|^{p-1}w` at every
//! node and then one backward-Euler step of the heat equation, so the
//! discrete solution after `n` steps approximates `(S(τ)N(τ))ⁿ φ`.
//!
//! The crate is `no_std` (it needs `alloc`). The `std` feature only links the
//! standard library; all numerics go through [`libm`], so results are
//! identical with or without it.
//!
//! Module map:
//!
//! * [`mesh`]: unit square, L-shape and unit cube triangulations;
//! * [`sparse`]: CSR matrices and conjugate gradients;
//! * [`fem`]: P1 mass and stiffness assembly, interpolation, L² norms and the
//!   implicit diffusion substep;
//! * [`initdata`]: the benchmark initial data;
//! * [`flows`]: the exact nonlinear flow, time horizons and the Lie stepper;
//! * [`comparators`]: fully implicit (Picard) and semi-implicit Euler schemes;
//! * [`verify`]: ODE oracle, splitting-order fits and weighted-norm diagnostics.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
pub use error::*;

pub(crate) mod math;

pub mod comparators;
pub mod fem;
pub mod flows;
pub mod initdata;
pub mod mesh;
pub mod sparse;
pub mod verify;

pub use comparators::{type1_step, type2_step, PicardConfig};
pub use fem::{FeFunction, FemOperators};
pub use flows::{Horizons, Lambda, ProblemSpec, RunRecord, Scheme};
pub use initdata::InitialDatum;
pub use mesh::{Domain, Mesh};
pub use sparse::{CgOptions, SolveReport, SparseMatrix};
