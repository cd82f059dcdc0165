//! Shared fixtures for the benchmarks.

use qcayley::{CayleyParams, Complex64, PerturbationKind, PerturbationSpec, SolutionBundle};

/// A well-conditioned case with fast growth, one with `|P|` dipping far
/// below 1 (extended precision), and one with the averaging parameter near 1/2.
pub fn cases() -> Vec<(&'static str, CayleyParams)> {
    [
        ("fast", 2.5, 0.2, Complex64::new(1.0, 2.0)),
        ("dip", 1.05, 0.1, Complex64::new(-2.0, -0.4)),
        ("near_half", 1.7, 0.45, Complex64::new(0.3, -4.0)),
    ]
    .into_iter()
    .map(|(name, q, eta, w)| (name, CayleyParams::new(q, eta, w).expect("valid fixture")))
    .collect()
}

pub fn random_phase(epsilon: f64, seed: u64) -> PerturbationSpec {
    PerturbationSpec::new(epsilon, PerturbationKind::RandomPhase { seed })
        .expect("positive epsilon")
}

pub fn bundle(params: &CayleyParams, k_max: u64) -> SolutionBundle {
    let window = params.window(k_max).expect("window");
    qcayley::synthesize(
        params,
        &window,
        &random_phase(0.1, 1),
        Complex64::new(1.0, 0.0),
    )
    .expect("synthesis")
}
