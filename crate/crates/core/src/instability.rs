//! Regimes without Hyers-Ulam stability.
//!
//! For `w = 0` the solutions are constants while `S` grows like `q^n`. For
//! `eta = 1/2` the step ratio tends to `-1`, so `P` settles onto a two-cycle
//! `±p*` and the terms of `S` under the forcing `E = epsilon P / |P|` tend to
//! a nonzero constant, so `S` grows linearly. Either way `|phi - c P|` leaves
//! every bounded band for every choice of `c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::CayleyParams;
use crate::error::{Error, Result};
use crate::lattice::LatticeWindow;
use crate::scaled::{ScaledComplex, ScaledReal};
use crate::solutions::{
    product_solution, variation_sum, PerturbationKind, PerturbationSpec, Recurrence,
};

/// Relative tolerance on `|P[k+2] - P[k]|` for accepting a two-cycle.
pub const CYCLE_TOL: f64 = 1e-7;
/// Consecutive indices that must satisfy [`CYCLE_TOL`].
pub const CYCLE_CONFIRMATIONS: usize = 2;
/// Escape thresholds recorded in [`DivergenceEvidence`].
pub const ESCAPE_MULTIPLES: [f64; 3] = [10.0, 100.0, 1000.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoCycleResult {
    /// Representative of `±p*` with non-negative real part (ties broken by
    /// a non-negative imaginary part).
    pub p_star: Complex64,
    pub converged_at: u64,
    /// `|P[k+2] - P[k]| / |P[k]|` at acceptance.
    pub cycle_residual: f64,
    /// `|P[k+1] + P[k]| / |P[k]|` at acceptance.
    pub alternation_residual: f64,
}

/// `z` or `-z`, whichever has non-negative real part.
pub fn canonical_sign(z: Complex64) -> Complex64 {
    let flip = if z.re.abs() <= 1e-12 * z.norm() {
        z.im < 0.0
    } else {
        z.re < 0.0
    };
    if flip {
        -z
    } else {
        z
    }
}

fn require_eta_half(params: &CayleyParams) -> Result<()> {
    params.require_valid()?;
    if !params.is_eta_half() {
        return Err(Error::InvalidParameter(format!(
            "this analysis needs eta = 1/2, got {}",
            params.eta
        )));
    }
    Ok(())
}

fn relative(a: ScaledComplex, b: ScaledComplex) -> f64 {
    (a - b)
        .abs()
        .checked_div(b.abs())
        .map_or(f64::INFINITY, |r| r.to_f64_saturating())
}

/// Iterates `P` until `|P[k+2] - P[k]| < 1e-7 |P[k]|` holds at two
/// consecutive indices.
pub fn two_cycle(params: &CayleyParams, window: &LatticeWindow) -> Result<TwoCycleResult> {
    require_eta_half(params)?;
    if params.is_w_zero() {
        return Err(Error::InvalidParameter(
            "w = 0 gives P = 1, not a two-cycle".into(),
        ));
    }
    let p: Vec<ScaledComplex> = Recurrence::new(params)?
        .take(window.len())
        .map(|s| s.p)
        .collect();
    let mut run = 0;
    let mut last = f64::NAN;
    for k in 0..p.len().saturating_sub(2) {
        last = relative(p[k + 2], p[k]);
        if last < CYCLE_TOL {
            run += 1;
        } else {
            run = 0;
        }
        if run >= CYCLE_CONFIRMATIONS {
            let p_star = p[k]
                .to_complex()
                .ok_or_else(|| Error::InvalidParameter("p* exceeds the double range".into()))?;
            return Ok(TwoCycleResult {
                p_star: canonical_sign(p_star),
                converged_at: k as u64,
                cycle_residual: last,
                alternation_residual: relative(-p[k + 1], p[k]),
            });
        }
    }
    let tail: Vec<String> = p.iter().rev().take(3).map(|z| z.to_string()).collect();
    Err(Error::NoConvergence {
        k_max: window.k_max(),
        detail: format!(
            "last relative two-step change {last:e}; last iterates {}",
            tail.join(", ")
        ),
    })
}

/// First index at which a deviation exceeded `multiple`, if it did.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub multiple: f64,
    pub index: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergencePoint {
    pub k: u64,
    pub p_abs: f64,
    pub s_abs: f64,
    /// `|P| |S - c|`
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEvidence {
    pub params: CayleyParams,
    pub epsilon: f64,
    pub c_tested: Complex64,
    pub threshold_multiples: Vec<Crossing>,
    pub max_deviation: f64,
    pub max_index: u64,
    pub profile: Vec<DivergencePoint>,
}

impl DivergenceEvidence {
    pub fn crossing(&self, multiple: f64) -> Option<u64> {
        self.threshold_multiples
            .iter()
            .find(|c| c.multiple == multiple)
            .and_then(|c| c.index)
    }
}

fn evidence(
    params: &CayleyParams,
    window: &LatticeWindow,
    spec: &PerturbationSpec,
    c: Complex64,
) -> Result<DivergenceEvidence> {
    let p = product_solution(params, window)?;
    let forcing = spec.forcing_trajectory(params, window)?;
    let s = variation_sum(params, window, &forcing, &p)?;
    let c_scaled = ScaledComplex::from_complex(c);
    let deviations: Vec<ScaledReal> = p
        .values()
        .iter()
        .zip(s.values())
        .map(|(pk, sk)| pk.abs() * (*sk - c_scaled).abs())
        .collect();
    let threshold_multiples = ESCAPE_MULTIPLES
        .iter()
        .map(|&multiple| Crossing {
            multiple,
            index: deviations
                .iter()
                .position(|d| *d > ScaledReal::from_f64(multiple))
                .map(|k| k as u64),
        })
        .collect();
    let (max_index, max) =
        deviations
            .iter()
            .enumerate()
            .fold((0, ScaledReal::ZERO), |best, (k, d)| {
                if *d > best.1 {
                    (k, *d)
                } else {
                    best
                }
            });
    let profile = (0..window.len())
        .map(|k| DivergencePoint {
            k: k as u64,
            p_abs: p.values()[k].abs().to_f64_saturating(),
            s_abs: s.values()[k].abs().to_f64_saturating(),
            deviation: deviations[k].to_f64_saturating(),
        })
        .collect();
    Ok(DivergenceEvidence {
        params: *params,
        epsilon: spec.epsilon,
        c_tested: c,
        threshold_multiples,
        max_deviation: max.to_f64_saturating(),
        max_index: max_index as u64,
        profile,
    })
}

/// `eta = 1/2` with forcing `E = epsilon P / |P|`: records when `|P| |S - c|`
/// first exceeds 10, 100 and 1000.
pub fn eta_half_s_divergence(
    params: &CayleyParams,
    window: &LatticeWindow,
    epsilon: f64,
    c: Complex64,
) -> Result<DivergenceEvidence> {
    require_eta_half(params)?;
    let spec = PerturbationSpec::new(epsilon, PerturbationKind::UnitPhaseOfP)?;
    evidence(params, window, &spec, c)
}

/// `w = 0` with forcing `E = epsilon`: the deviation is `|epsilon (q^n - 1) - c|`.
pub fn w_zero_divergence(
    window: &LatticeWindow,
    eta: f64,
    epsilon: f64,
    c: Complex64,
) -> Result<DivergenceEvidence> {
    let params = CayleyParams::new(window.q(), eta, Complex64::new(0.0, 0.0))?;
    let spec = PerturbationSpec::new(epsilon, PerturbationKind::UnitPhaseOfP)?;
    evidence(&params, window, &spec, c)
}
