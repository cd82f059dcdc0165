//! Hyers-Ulam stability of the first-order Cayley quantum equation
//! `D_q x - w <x>_eta = 0` on the lattice `{q^k : k >= 0}`.
//!
//! Lattice values are carried as [`ScaledComplex`] (a complex mantissa with a
//! separate binary exponent) because the product solution grows like
//! `q^(k^2 / 2)` and leaves the double range within a few dozen steps.

pub mod cayley;
pub mod error;
pub mod grid;
pub mod hus;
pub mod instability;
pub mod lattice;
mod precise;
pub mod scaled;
pub mod series;
pub mod solutions;

pub use cayley::{
    cayley_average, conditioned_error, jackson_derivative, residual, residual_scale, validate,
    CayleyParams, Trajectory, Validity,
};
pub use error::{Error, ForbiddenBranch, Result};
pub use grid::{Draw, ParamGrid, Range};
pub use hus::{certify, tail_sum_psi, HusReport, Verdict};
pub use instability::{
    eta_half_s_divergence, two_cycle, w_zero_divergence, DivergenceEvidence, TwoCycleResult,
};
pub use lattice::{LatticePoint, LatticeWindow, DEFAULT_K_MAX};
pub use scaled::{ScaledComplex, ScaledReal};
pub use series::Truncation;
pub use solutions::{
    product_solution, synthesize, synthesize_shadowed, variation_sum, PerturbationKind,
    PerturbationSpec, SolutionBundle,
};

pub use num_complex::Complex64;
