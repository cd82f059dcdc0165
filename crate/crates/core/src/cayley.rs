//! Coefficient validation and the operators of the Cayley quantum equation
//!
//! ```text
//! D_q x(t) - w <x(t)>_eta = 0,
//! D_q x(t)     = (x(qt) - x(t)) / ((q - 1) t),
//! <x(t)>_eta   = eta x(qt) + (1 - eta) x(t).
//! ```
//!
//! Solving for `x(qt)` gives the one-step multiplier
//! `r(t) = (1 + w(1-eta)(q-1)t) / (1 - w eta (q-1)t)`. The coefficient `w`
//! must avoid the two countable families where the numerator or the
//! denominator of `r` vanishes at some lattice point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ForbiddenBranch, Result};
use crate::lattice::{LatticePoint, LatticeWindow};
use crate::scaled::{ScaledComplex, ScaledReal};

/// Relative distance under which `w` is treated as a forbidden value.
pub const FORBIDDEN_TOL: f64 = 1e-12;
/// Relative distance under which `w` is flagged as ill-conditioned.
pub const NEAR_SINGULAR_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Validity {
    Valid,
    Forbidden { k: u64, branch: ForbiddenBranch },
    NearSingular { k: u64, distance: f64 },
}

/// The forbidden value of `branch` at index `k`, if the branch exists.
pub fn forbidden_value(q: f64, eta: f64, branch: ForbiddenBranch, k: u64) -> Option<f64> {
    let qk = q.powf(k as f64);
    match branch {
        ForbiddenBranch::Numerator => Some(-1.0 / ((1.0 - eta) * (q - 1.0) * qk)),
        ForbiddenBranch::Denominator if eta > 0.0 => Some(1.0 / (eta * (q - 1.0) * qk)),
        ForbiddenBranch::Denominator => None,
    }
}

fn check_ranges(q: f64, eta: f64, w: Complex64) -> Result<()> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must be a finite real > 1, got {q}"
        )));
    }
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in [0, 1/2], got {eta}"
        )));
    }
    if !w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "w must be finite, got {w}"
        )));
    }
    Ok(())
}

/// Classifies `w` against the excluded coefficient set.
///
/// Forbidden magnitudes decrease strictly in `k`, so only indices whose
/// magnitude is at least `(1 - 1e-6)|w|` can match; of those only the few
/// around `log_q(A / |w|)` can come within relative `1e-6`.
pub fn validate(q: f64, eta: f64, w: Complex64) -> Result<Validity> {
    check_ranges(q, eta, w)?;
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Validity::Valid);
    }
    let w_abs = w.norm();
    let mut closest: Option<(f64, u64, ForbiddenBranch)> = None;
    for branch in [ForbiddenBranch::Numerator, ForbiddenBranch::Denominator] {
        let Some(base) = forbidden_value(q, eta, branch, 0) else {
            continue;
        };
        let floor_mag = (1.0 - NEAR_SINGULAR_TOL) * w_abs;
        if base.abs() < floor_mag {
            continue;
        }
        let centre = ((base.abs() / w_abs).ln() / q.ln()).max(0.0);
        let lo = (centre.floor() as u64).saturating_sub(2);
        let hi = centre.ceil() as u64 + 2;
        for k in lo..=hi {
            let f = forbidden_value(q, eta, branch, k).expect("branch exists");
            if f.abs() < floor_mag {
                break;
            }
            let distance = (w - f).norm() / f.abs();
            if closest.is_none_or(|(d, _, _)| distance < d) {
                closest = Some((distance, k, branch));
            }
        }
    }
    Ok(match closest {
        Some((d, k, branch)) if d <= FORBIDDEN_TOL => Validity::Forbidden { k, branch },
        Some((d, k, _)) if d <= NEAR_SINGULAR_TOL => Validity::NearSingular { k, distance: d },
        _ => Validity::Valid,
    })
}

/// The triple `(q, eta, w)` together with its validity status.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CayleyParams {
    pub q: f64,
    pub eta: f64,
    pub w: Complex64,
    pub validity: Validity,
}

impl CayleyParams {
    /// Checks ranges and classifies `w`. Forbidden coefficients are still
    /// representable; operations that need a well-defined recurrence refuse
    /// them.
    pub fn new(q: f64, eta: f64, w: Complex64) -> Result<Self> {
        let validity = validate(q, eta, w)?;
        Ok(Self {
            q,
            eta,
            w,
            validity,
        })
    }

    pub fn is_w_zero(&self) -> bool {
        self.w == Complex64::new(0.0, 0.0)
    }

    pub fn is_eta_half(&self) -> bool {
        self.eta == 0.5
    }

    /// Errors on a forbidden coefficient; near-singular ones pass.
    pub fn require_valid(&self) -> Result<()> {
        match self.validity {
            Validity::Forbidden { k, branch } => Err(Error::Forbidden { k, branch }),
            _ => Ok(()),
        }
    }

    /// Like [`require_valid`](Self::require_valid) but also rejects near-singular coefficients.
    pub fn require_strictly_valid(&self) -> Result<()> {
        self.require_valid()?;
        match self.validity {
            Validity::NearSingular { k, distance } => Err(Error::NearSingular { k, distance }),
            _ => Ok(()),
        }
    }

    /// The regime where the stability theory applies: valid, `w != 0`, `eta < 1/2`.
    pub fn require_stable_regime(&self) -> Result<()> {
        self.require_valid()?;
        if self.is_w_zero() {
            return Err(Error::NotApplicable(
                "w = 0 has no Hyers-Ulam stability".into(),
            ));
        }
        if self.eta >= 0.5 {
            return Err(Error::NotApplicable(
                "eta = 1/2 has no Hyers-Ulam stability".into(),
            ));
        }
        Ok(())
    }

    pub fn window(&self, k_max: u64) -> Result<LatticeWindow> {
        LatticeWindow::new(self.q, k_max)
    }

    fn w_scaled(&self) -> ScaledComplex {
        ScaledComplex::from_complex(self.w)
    }

    /// `1 + w(1-eta)(q-1)t`.
    pub fn numerator(&self, p: &LatticePoint) -> ScaledComplex {
        let ws = self.w_scaled() * p.step().to_complex();
        ScaledComplex::ONE + ws.scale(1.0 - self.eta)
    }

    /// `1 - w eta (q-1)t`.
    pub fn denominator(&self, p: &LatticePoint) -> ScaledComplex {
        let ws = self.w_scaled() * p.step().to_complex();
        ScaledComplex::ONE - ws.scale(self.eta)
    }

    /// `r(t) = x(qt) / x(t)` along any solution.
    pub fn step_ratio(&self, p: &LatticePoint) -> Result<ScaledComplex> {
        self.require_valid()?;
        self.numerator(p).checked_div(self.denominator(p))
    }
}

/// A complex-valued function on the window `k = 0..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryRecord")]
pub struct Trajectory {
    #[serde(flatten)]
    window: LatticeWindow,
    values: Vec<ScaledComplex>,
}

#[derive(Deserialize)]
struct TrajectoryRecord {
    #[serde(flatten)]
    window: LatticeWindow,
    values: Vec<ScaledComplex>,
}

impl TryFrom<TrajectoryRecord> for Trajectory {
    type Error = Error;

    fn try_from(r: TrajectoryRecord) -> Result<Self> {
        LatticeWindow::new(r.window.q(), r.window.k_max())?;
        Trajectory::new(r.window, r.values)
    }
}

impl Trajectory {
    pub fn new(window: LatticeWindow, values: Vec<ScaledComplex>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "trajectory has {} values but the window needs {}",
                values.len(),
                window.len()
            )));
        }
        Ok(Self { window, values })
    }

    pub fn from_fn(window: LatticeWindow, f: impl FnMut(LatticePoint) -> ScaledComplex) -> Self {
        let values = window.iter().map(f).collect();
        Self { window, values }
    }

    pub fn constant(window: LatticeWindow, value: ScaledComplex) -> Self {
        Self {
            window,
            values: vec![value; window.len()],
        }
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn values(&self) -> &[ScaledComplex] {
        &self.values
    }

    pub fn into_values(self) -> Vec<ScaledComplex> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: u64) -> Option<ScaledComplex> {
        self.values.get(k as usize).copied()
    }

    /// Pointwise `a * self + b * other`.
    pub fn combine(&self, a: ScaledComplex, other: &Self, b: ScaledComplex) -> Result<Self> {
        if self.window != other.window {
            return Err(Error::InvalidParameter(
                "trajectories live on different windows".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Self {
            window: self.window,
            values,
        })
    }
}

fn check_successor(traj: &Trajectory, k: u64) -> Result<()> {
    let k_max = traj.window.k_max();
    if k + 1 > k_max {
        return Err(Error::WindowEdge { k, k_max });
    }
    Ok(())
}

/// `(x(q^{k+1}) - x(q^k)) / ((q - 1) q^k)`.
pub fn jackson_derivative(traj: &Trajectory, k: u64) -> Result<ScaledComplex> {
    check_successor(traj, k)?;
    let step = traj.window.point(k).step().to_complex();
    (traj.values[k as usize + 1] - traj.values[k as usize]).checked_div(step)
}

/// `eta x(q^{k+1}) + (1 - eta) x(q^k)`.
pub fn cayley_average(traj: &Trajectory, eta: f64, k: u64) -> Result<ScaledComplex> {
    check_successor(traj, k)?;
    let i = k as usize;
    Ok(traj.values[i + 1].scale(eta) + traj.values[i].scale(1.0 - eta))
}

fn check_same_q(params: &CayleyParams, traj: &Trajectory) -> Result<()> {
    if params.q != traj.window.q() {
        return Err(Error::InvalidParameter(format!(
            "trajectory lattice has q = {} but the equation has q = {}",
            traj.window.q(),
            params.q
        )));
    }
    if traj.len() < 2 {
        return Err(Error::InvalidParameter(
            "residual needs at least two lattice points".into(),
        ));
    }
    Ok(())
}

/// `E(q^k) = D_q x(q^k) - w <x(q^k)>_eta` for `k = 0..k_max-1`.
///
/// The result lives on the window shortened by one point, since the last
/// point has no successor.
pub fn residual(params: &CayleyParams, traj: &Trajectory) -> Result<Trajectory> {
    params.require_valid()?;
    check_same_q(params, traj)?;
    let w = ScaledComplex::from_complex(params.w);
    let k_max = traj.window.k_max();
    let values = (0..k_max)
        .map(|k| Ok(jackson_derivative(traj, k)? - w * cayley_average(traj, params.eta, k)?))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(traj.window.with_k_max(k_max - 1), values)
}

/// Magnitude of the operands that cancel inside [`residual`] at each index:
/// `(|x(qt)| + |x(t)|) / ((q-1)t) + |w| (eta |x(qt)| + (1-eta) |x(t)|)`.
///
/// Rounding in the stored trajectory perturbs the residual by roughly
/// machine epsilon times this quantity, so comparisons of residuals are
/// made relative to it.
pub fn residual_scale(params: &CayleyParams, traj: &Trajectory) -> Result<Vec<ScaledReal>> {
    check_same_q(params, traj)?;
    let w_abs = ScaledReal::from_f64(params.w.norm());
    let k_max = traj.window.k_max();
    (0..k_max)
        .map(|k| {
            let i = k as usize;
            let (next, here) = (traj.values[i + 1].abs(), traj.values[i].abs());
            let step = traj.window.point(k).step();
            let difference = (next + here).checked_div(step)?;
            let average = next * ScaledReal::from_f64(params.eta)
                + here * ScaledReal::from_f64(1.0 - params.eta);
            Ok(difference + w_abs * average)
        })
        .collect()
}

/// `|a - b| / max(|b|, scale)`: relative error of a recovered value against
/// its reference, with the operand scale as a floor for the denominator.
pub fn conditioned_error(a: ScaledComplex, b: ScaledComplex, scale: ScaledReal) -> f64 {
    let denom = b.abs().max(scale);
    let diff = (a - b).abs();
    if diff.is_zero() {
        return 0.0;
    }
    diff.checked_div(denom)
        .map_or(f64::INFINITY, |r| r.to_f64_saturating())
}
