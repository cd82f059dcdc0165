use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which of the two excluded coefficient families a forbidden `w` falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForbiddenBranch {
    /// `w = -1 / ((1 - eta)(q - 1) q^k)`: the step ratio's numerator vanishes.
    Numerator,
    /// `w = 1 / (eta (q - 1) q^k)`: the step ratio's denominator vanishes.
    Denominator,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient is forbidden at lattice index {k} ({branch:?} branch)")]
    Forbidden { k: u64, branch: ForbiddenBranch },

    #[error(
        "coefficient is within relative distance {distance:e} of the forbidden value at index {k}"
    )]
    NearSingular { k: u64, distance: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("series truncation exceeded the cap of {cap} terms (last term {last_term:e}, partial sum {partial:e})")]
    TruncationCap {
        cap: usize,
        last_term: f64,
        partial: f64,
    },

    #[error("no convergence within k_max = {k_max}: {detail}")]
    NoConvergence { k_max: u64, detail: String },

    #[error("index {k} has no successor in a window with k_max = {k_max}")]
    WindowEdge { k: u64, k_max: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("perturbation violates |E| <= epsilon at index {k}: |E| = {magnitude:e}, epsilon = {epsilon:e}")]
    PerturbationBound {
        k: u64,
        magnitude: f64,
        epsilon: f64,
    },

    #[error("residual bound violated at index {k}: |residual| = {magnitude:e} exceeds epsilon = {epsilon:e}")]
    PremiseViolated {
        k: u64,
        magnitude: f64,
        epsilon: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
