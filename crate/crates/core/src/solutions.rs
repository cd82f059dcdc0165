//! Exact and perturbed solutions on the lattice.
//!
//! * `P(q^n) = prod_{k<n} r(q^k)`, the solution with `P(1) = 1`;
//! * `S(q^n) = sum_{m<n} (q-1)q^m E(q^m) / ([1 + w(1-eta)(q-1)q^m] P(q^m))`;
//! * `phi = P S + c P`, the general solution of `D_q phi - w <phi>_eta = E`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{CayleyParams, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticeWindow};
use crate::precise::{plan_tails, shadowed_trajectory};
use crate::scaled::{ScaledComplex, ScaledReal};
use crate::series::{sum_series, TruncationRule};

/// Slack allowed on `|E| <= epsilon` for values that are exactly `epsilon`
/// in exact arithmetic but carry rounding from `cos`/`sin` or normalization.
pub const FORCING_SLACK: f64 = 1e-12;

/// Tolerance used to choose how far past the window the backward
/// recurrence for the shadow offset starts.
const BACKWARD_START_TOL: f64 = 1e-16;

/// One step of the homogeneous recurrence at lattice point `q^m`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Step {
    pub point: LatticePoint,
    /// `1 + w(1-eta)(q-1)q^m`
    pub numerator: ScaledComplex,
    /// `1 - w eta (q-1)q^m`
    pub denominator: ScaledComplex,
    /// `P(q^m)`
    pub p: ScaledComplex,
}

impl Step {
    pub fn ratio(&self) -> ScaledComplex {
        self.numerator
            .checked_div(self.denominator)
            .expect("denominator is nonzero for a valid coefficient")
    }

    /// `(q-1)q^m / [1 + w(1-eta)(q-1)q^m]`, the forcing weight without `1/P`.
    pub fn weight(&self) -> ScaledComplex {
        self.point
            .step()
            .to_complex()
            .checked_div(self.numerator)
            .expect("numerator is nonzero for a valid coefficient")
    }

    /// `weight / P(q^m)`, the coefficient of `E(q^m)` in the series for `S`.
    pub fn series_coefficient(&self) -> ScaledComplex {
        self.weight()
            .checked_div(self.p)
            .expect("P never vanishes for a valid coefficient")
    }
}

/// Walks the lattice from `q^0` producing the recurrence data and `P`.
#[derive(Clone, Debug)]
pub(crate) struct Recurrence {
    params: CayleyParams,
    m: u64,
    p: ScaledComplex,
}

impl Recurrence {
    pub fn new(params: &CayleyParams) -> Result<Self> {
        params.require_valid()?;
        LatticeWindow::new(params.q, 0)?;
        Ok(Self {
            params: *params,
            m: 0,
            p: ScaledComplex::ONE,
        })
    }
}

impl Iterator for Recurrence {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        let point = LatticePoint::new(self.params.q, self.m).ok()?;
        let step = Step {
            point,
            numerator: self.params.numerator(&point),
            denominator: self.params.denominator(&point),
            p: self.p,
        };
        self.p *= step.ratio();
        self.m += 1;
        Some(step)
    }
}

/// Terms `weight_m prod_{j=k}^{m-1} 1/r_j` for `m = k, k+1, ...`, i.e. the
/// series coefficients rescaled by `P(q^k)`.
pub(crate) struct NormalizedTerms {
    steps: std::iter::Skip<Recurrence>,
    gain: ScaledComplex,
}

impl NormalizedTerms {
    pub fn from(params: &CayleyParams, k: u64) -> Result<Self> {
        Ok(Self {
            steps: Recurrence::new(params)?.skip(k as usize),
            gain: ScaledComplex::ONE,
        })
    }

    pub fn next_term(&mut self) -> Result<(Step, ScaledComplex)> {
        let step = self.steps.next().expect("recurrence is unbounded");
        let term = step.weight() * self.gain;
        self.gain = self.gain.checked_div(step.ratio())?;
        Ok((step, term))
    }
}

/// The exact solution with `P(1) = 1`.
pub fn product_solution(params: &CayleyParams, window: &LatticeWindow) -> Result<Trajectory> {
    check_window(params, window)?;
    let values = Recurrence::new(params)?
        .take(window.len())
        .map(|s| s.p)
        .collect();
    Trajectory::new(*window, values)
}

fn check_window(params: &CayleyParams, window: &LatticeWindow) -> Result<()> {
    if params.q != window.q() {
        return Err(Error::InvalidParameter(format!(
            "window has q = {} but the equation has q = {}",
            window.q(),
            params.q
        )));
    }
    Ok(())
}

/// Partial sums `S[n] = sum_{m<n} term(m)` with `S[0] = 0`.
pub fn variation_sum(
    params: &CayleyParams,
    window: &LatticeWindow,
    forcing: &Trajectory,
    p: &Trajectory,
) -> Result<Trajectory> {
    check_window(params, window)?;
    if forcing.window() != *window || p.window() != *window {
        return Err(Error::InvalidParameter(
            "forcing and P must live on the window".into(),
        ));
    }
    let mut values = Vec::with_capacity(window.len());
    let mut sum = ScaledComplex::ZERO;
    for (m, step) in Recurrence::new(params)?.take(window.len()).enumerate() {
        values.push(sum);
        let coefficient = step
            .weight()
            .checked_div(p.values()[m])
            .map_err(|_| Error::InvalidParameter(format!("P vanishes at index {m}")))?;
        sum += coefficient * forcing.values()[m];
    }
    Trajectory::new(*window, values)
}

/// How the forcing `E` is generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `E(t) = value` for every `t`.
    ConstantComplex { value: Complex64 },
    /// `E(t) = epsilon P(t) / |P(t)|`.
    UnitPhaseOfP,
    /// `E(q^m) = epsilon e^{i theta_m}`, `theta_m` uniform on `[0, 2 pi)`
    /// drawn in order `m = 0, 1, ...` from a ChaCha8 stream seeded with `seed`.
    RandomPhase { seed: u64 },
    /// Tabulated values for `m = 0..len`; zero beyond the table.
    Custom { values: Vec<Complex64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    #[serde(flatten)]
    pub kind: PerturbationKind,
}

impl PerturbationSpec {
    pub fn new(epsilon: f64, kind: PerturbationKind) -> Result<Self> {
        let spec = Self { epsilon, kind };
        spec.check()?;
        Ok(spec)
    }

    pub fn zero(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            PerturbationKind::ConstantComplex {
                value: Complex64::new(0.0, 0.0),
            },
        )
    }

    pub fn check(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be a finite positive real, got {}",
                self.epsilon
            )));
        }
        let limit = self.epsilon * (1.0 + FORCING_SLACK);
        let check_value = |k: usize, v: &Complex64| {
            if !v.is_finite() || v.norm() > limit {
                return Err(Error::PerturbationBound {
                    k: k as u64,
                    magnitude: v.norm(),
                    epsilon: self.epsilon,
                });
            }
            Ok(())
        };
        match &self.kind {
            PerturbationKind::ConstantComplex { value } => check_value(0, value),
            PerturbationKind::Custom { values } => values
                .iter()
                .enumerate()
                .try_for_each(|(k, v)| check_value(k, v)),
            _ => Ok(()),
        }
    }

    /// `E(q^m)` for `m = 0..n`.
    pub fn forcing(&self, params: &CayleyParams, n: usize) -> Result<Vec<ScaledComplex>> {
        self.check()?;
        let eps = self.epsilon;
        Ok(match &self.kind {
            PerturbationKind::ConstantComplex { value } => {
                vec![ScaledComplex::from_complex(*value); n]
            }
            PerturbationKind::UnitPhaseOfP => Recurrence::new(params)?
                .take(n)
                .map(|s| unit_phase(s.p).scale(eps))
                .collect(),
            PerturbationKind::RandomPhase { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| {
                        let theta = TAU * rng.random::<f64>();
                        ScaledComplex::from_complex(Complex64::from_polar(eps, theta))
                    })
                    .collect()
            }
            PerturbationKind::Custom { values } => (0..n)
                .map(|m| {
                    values
                        .get(m)
                        .map_or(ScaledComplex::ZERO, |v| ScaledComplex::from_complex(*v))
                })
                .collect(),
        })
    }

    pub fn forcing_trajectory(
        &self,
        params: &CayleyParams,
        window: &LatticeWindow,
    ) -> Result<Trajectory> {
        Trajectory::new(*window, self.forcing(params, window.len())?)
    }
}

/// `z / |z|` as an ordinary complex number on the unit circle.
pub(crate) fn unit_phase(z: ScaledComplex) -> ScaledComplex {
    let m = z.mantissa();
    ScaledComplex::from_complex(m / m.norm())
}

/// `P`, `S`, `c`, `phi = P S + c P` and the forcing `E` on one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub params: CayleyParams,
    pub perturbation: PerturbationSpec,
    pub c: Complex64,
    pub p: Trajectory,
    pub s: Trajectory,
    pub phi: Trajectory,
    pub forcing: Trajectory,
}

impl SolutionBundle {
    pub fn window(&self) -> LatticeWindow {
        self.p.window()
    }

    /// Largest `|phi - (P S + c P)|`, relative to the magnitude of the
    /// operands on the right (and at least 1).
    pub fn identity_error(&self) -> f64 {
        let c = ScaledComplex::from_complex(self.c);
        let (p, s, phi) = (self.p.values(), self.s.values(), self.phi.values());
        (0..p.len())
            .map(|k| {
                let rebuilt = p[k] * s[k] + c * p[k];
                let scale = phi[k]
                    .abs()
                    .max(p[k].abs() * (s[k].abs() + c.abs()))
                    .max(ScaledReal::ONE);
                (phi[k] - rebuilt)
                    .abs()
                    .checked_div(scale)
                    .map_or(f64::INFINITY, |r| r.to_f64_saturating())
            })
            .fold(0.0, f64::max)
    }
}

/// Where the perturbed trajectory is anchored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor {
    /// `phi(1) = c`.
    Initial(Complex64),
    /// `lim phi / P = x0`; only meaningful when `w != 0` and `eta < 1/2`.
    Shadow(Complex64),
}

/// Builds `phi` with `D_q phi - w <phi>_eta = E` and `phi(1) = c`.
pub fn synthesize(
    params: &CayleyParams,
    window: &LatticeWindow,
    spec: &PerturbationSpec,
    c: Complex64,
) -> Result<SolutionBundle> {
    synthesize_anchored(params, window, spec, Anchor::Initial(c))
}

/// Builds `phi` whose shadowing coefficient `lim phi / P` equals `x0`.
pub fn synthesize_shadowed(
    params: &CayleyParams,
    window: &LatticeWindow,
    spec: &PerturbationSpec,
    x0: Complex64,
) -> Result<SolutionBundle> {
    synthesize_anchored(params, window, spec, Anchor::Shadow(x0))
}

pub fn synthesize_anchored(
    params: &CayleyParams,
    window: &LatticeWindow,
    spec: &PerturbationSpec,
    anchor: Anchor,
) -> Result<SolutionBundle> {
    check_window(params, window)?;
    params.require_valid()?;
    spec.check()?;
    let p = product_solution(params, window)?;
    let forcing = spec.forcing_trajectory(params, window)?;
    let s = variation_sum(params, window, &forcing, &p)?;

    let stable = params.require_stable_regime().is_ok();
    let extended = if stable {
        plan_tails(params, window.k_max())?.extended
    } else {
        None
    };
    let (c, phi) = match (anchor, stable) {
        (_, true) if extended.is_some() => {
            let (far, bits) = extended.expect("checked");
            let values = spec.forcing(params, far.max(window.len()))?;
            let phi =
                shadowed_trajectory(params, window.k_max() as usize, far, bits, &values, anchor)?;
            let c = match anchor {
                Anchor::Initial(c) => c,
                Anchor::Shadow(_) => phi[0].to_complex().ok_or_else(|| {
                    Error::InvalidParameter("initial value exceeds the double range".into())
                })?,
            };
            (c, Trajectory::new(*window, phi)?)
        }
        (_, true) => {
            let offset = shadow_offset(params, window, spec)?;
            let x0 = match anchor {
                Anchor::Initial(c) => ScaledComplex::from_complex(c) + offset[0],
                Anchor::Shadow(x0) => ScaledComplex::from_complex(x0),
            };
            let c = match anchor {
                Anchor::Initial(c) => c,
                Anchor::Shadow(_) => (x0 - offset[0]).to_complex().ok_or_else(|| {
                    Error::InvalidParameter("initial value exceeds the double range".into())
                })?,
            };
            let values = p
                .values()
                .iter()
                .zip(&offset)
                .map(|(&pk, &dk)| x0 * pk - dk)
                .collect();
            (c, Trajectory::new(*window, values)?)
        }
        (Anchor::Initial(c), false) => (c, forward_recurrence(params, window, &forcing, c)?),
        (Anchor::Shadow(_), false) => {
            return Err(Error::NotApplicable(
                "a shadowing coefficient exists only for w != 0 and eta < 1/2".into(),
            ))
        }
    };

    Ok(SolutionBundle {
        params: *params,
        perturbation: spec.clone(),
        c,
        p,
        s,
        phi,
        forcing,
    })
}

/// `phi(q^{k+1}) = r(q^k) phi(q^k) + (q-1)q^k E(q^k) / (1 - w eta (q-1)q^k)`.
fn forward_recurrence(
    params: &CayleyParams,
    window: &LatticeWindow,
    forcing: &Trajectory,
    c: Complex64,
) -> Result<Trajectory> {
    let mut phi = ScaledComplex::from_complex(c);
    let mut values = Vec::with_capacity(window.len());
    for (m, step) in Recurrence::new(params)?.take(window.len()).enumerate() {
        values.push(phi);
        let push = step
            .point
            .step()
            .to_complex()
            .checked_div(step.denominator)?
            * forcing.values()[m];
        phi = step.ratio() * phi + push;
    }
    Trajectory::new(*window, values)
}

/// `d_k = P(q^k) sum_{m>=k} coefficient(m) E(q^m)` for `k = 0..=k_max`, so
/// that `phi = x0 P - d` with `x0 = c + d_0`.
///
/// Evaluated by the backward recurrence `d_k = weight_k E_k + d_{k+1} / r_k`,
/// which damps rounding errors because `|1 / r_k| -> eta / (1 - eta) < 1`.
/// The start index is chosen past the window by the series truncation rule.
fn shadow_offset(
    params: &CayleyParams,
    window: &LatticeWindow,
    spec: &PerturbationSpec,
) -> Result<Vec<ScaledComplex>> {
    let k_max = window.k_max() as usize;
    let rule = TruncationRule::with_tolerance(params.eta, BACKWARD_START_TOL);

    // unit-forcing tail from k_max decides how many extra points are needed
    let mut steps: Vec<Step> = Recurrence::new(params)?.take(k_max + 1).collect();
    let mut walker = Recurrence::new(params)?.skip(k_max);
    let mut gain = ScaledComplex::ONE;
    let tail = sum_series(&rule, |_| {
        let step = walker.next().expect("recurrence is unbounded");
        let term = step.weight() * gain;
        gain = gain.checked_div(step.ratio())?;
        if step.point.k() as usize > k_max {
            steps.push(step);
        }
        Ok((term, term.abs()))
    })?;
    let far = k_max + tail.truncation.terms_used;
    let forcing = spec.forcing(params, far + 1)?;
    debug_assert!(steps.len() >= far);

    let mut offset = vec![ScaledComplex::ZERO; k_max + 1];
    let mut d = ScaledComplex::ZERO;
    for m in (0..far.min(steps.len())).rev() {
        let step = &steps[m];
        d = step.weight() * forcing[m] + d.checked_div(step.ratio())?;
        if m <= k_max {
            offset[m] = d;
        }
    }
    Ok(offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{conditioned_error, residual, residual_scale};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cplx(z: ScaledComplex) -> Complex64 {
        z.to_complex().unwrap()
    }

    #[test]
    fn zero_coefficient_product_is_one() {
        let params = CayleyParams::new(1.3, 0.2, c(0.0, 0.0)).unwrap();
        let p = product_solution(&params, &params.window(300).unwrap()).unwrap();
        assert!(p.values().iter().all(|v| *v == ScaledComplex::ONE));
    }

    #[test]
    fn hand_iterated_product() {
        let params = CayleyParams::new(2.0, 0.0, c(1.0, 0.0)).unwrap();
        let p = product_solution(&params, &params.window(3).unwrap()).unwrap();
        let got: Vec<f64> = p.values().iter().map(|v| cplx(*v).re).collect();
        assert_eq!(got, vec![1.0, 2.0, 6.0, 30.0]);
    }

    #[test]
    fn eta_zero_product_grows_without_overflow() {
        let params = CayleyParams::new(2.0, 0.0, c(0.5, 0.5)).unwrap();
        let p = product_solution(&params, &params.window(256).unwrap()).unwrap();
        let logs: Vec<f64> = p.values().iter().map(|v| v.log2_abs()).collect();
        // |w|(q-1)q^k > 2 from k = 2 on
        for k in 2..256 {
            assert!(logs[k + 1] > logs[k]);
        }
        assert!(logs[256] > 30_000.0);
    }

    #[test]
    fn forbidden_coefficient_is_refused() {
        let params = CayleyParams::new(2.0, 0.0, c(-1.0, 0.0)).unwrap();
        assert!(matches!(
            product_solution(&params, &params.window(4).unwrap()),
            Err(Error::Forbidden { .. })
        ));
    }

    #[test]
    fn variation_sum_examples() {
        let params = CayleyParams::new(2.0, 0.0, c(1.0, 0.0)).unwrap();
        let window = params.window(2).unwrap();
        let p = product_solution(&params, &window).unwrap();
        let e = Trajectory::constant(window, ScaledComplex::ONE);
        let s = variation_sum(&params, &window, &e, &p).unwrap();
        let got: Vec<f64> = s.values().iter().map(|v| cplx(*v).re).collect();
        assert_eq!(got[0], 0.0);
        assert!((got[1] - 0.5).abs() < 1e-15);
        assert!((got[2] - 5.0 / 6.0).abs() < 1e-15);

        let zero = Trajectory::constant(window, ScaledComplex::ZERO);
        let s = variation_sum(&params, &window, &zero, &p).unwrap();
        assert!(s.values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn w_zero_sum_is_geometric() {
        let (q, eps) = (1.7, 0.3);
        let params = CayleyParams::new(q, 0.1, c(0.0, 0.0)).unwrap();
        let window = params.window(40).unwrap();
        let p = product_solution(&params, &window).unwrap();
        let e = Trajectory::constant(window, ScaledComplex::from_real(eps));
        let s = variation_sum(&params, &window, &e, &p).unwrap();
        for (n, v) in s.values().iter().enumerate() {
            let expected = eps * (q.powi(n as i32) - 1.0);
            let got = cplx(*v).re;
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs().max(1e-300),
                "n={n}"
            );
        }
    }

    #[test]
    fn homogeneous_synthesis_is_a_multiple_of_p() {
        let params = CayleyParams::new(1.5, 0.3, c(-0.4, 1.1)).unwrap();
        let window = params.window(80).unwrap();
        let c0 = c(0.7, -0.2);
        let b = synthesize(&params, &window, &PerturbationSpec::zero(0.1).unwrap(), c0).unwrap();
        for (phi, p) in b.phi.values().iter().zip(b.p.values()) {
            let expected = ScaledComplex::from_complex(c0) * *p;
            assert!(
                (*phi - expected)
                    .abs()
                    .checked_div(expected.abs())
                    .unwrap()
                    .to_f64()
                    .unwrap()
                    < 1e-13
            );
        }
        assert!((b.c - c0).norm() < 1e-15);
    }

    #[test]
    fn constant_witness_stays_constant() {
        let (eps, w) = (0.2, c(0.8, -1.5));
        let params = CayleyParams::new(2.0, 0.0, w).unwrap();
        let window = params.window(256).unwrap();
        let spec = PerturbationSpec::new(
            eps,
            PerturbationKind::ConstantComplex {
                value: c(-eps, 0.0),
            },
        )
        .unwrap();
        let b = synthesize_shadowed(&params, &window, &spec, c(0.0, 0.0)).unwrap();
        let target = eps / w;
        for v in b.phi.values() {
            assert!((cplx(*v) - target).norm() < 1e-14 * target.norm());
        }
        assert!((b.c - target).norm() < 1e-14);
    }

    #[test]
    fn random_phase_round_trip() {
        let params = CayleyParams::new(1.8, 0.35, c(1.2, 0.6)).unwrap();
        let window = params.window(256).unwrap();
        let spec = PerturbationSpec::new(0.5, PerturbationKind::RandomPhase { seed: 42 }).unwrap();
        let b = synthesize(&params, &window, &spec, c(0.3, 0.1)).unwrap();
        let e = residual(&params, &b.phi).unwrap();
        let scale = residual_scale(&params, &b.phi).unwrap();
        for k in 0..e.len() {
            let err = conditioned_error(e.values()[k], b.forcing.values()[k], scale[k]);
            assert!(err < 1e-10, "k={k} err={err}");
        }
        assert!(b.identity_error() < 1e-12);
        assert_eq!(b.s.values()[0], ScaledComplex::ZERO);
        assert_eq!(b.p.values()[0], ScaledComplex::ONE);
    }

    #[test]
    fn forward_and_backward_constructions_agree_early() {
        let params = CayleyParams::new(1.6, 0.2, c(0.9, -0.3)).unwrap();
        let window = params.window(30).unwrap();
        let spec = PerturbationSpec::new(0.1, PerturbationKind::RandomPhase { seed: 3 }).unwrap();
        let c0 = c(0.25, 0.5);
        let b = synthesize(&params, &window, &spec, c0).unwrap();
        let direct = forward_recurrence(&params, &window, &b.forcing, c0).unwrap();
        for k in 0..6 {
            let (x, y) = (cplx(b.phi.values()[k]), cplx(direct.values()[k]));
            assert!((x - y).norm() < 1e-12 * x.norm().max(1.0), "k={k}");
        }
    }

    #[test]
    fn perturbation_bounds_are_enforced() {
        assert!(PerturbationSpec::new(0.0, PerturbationKind::UnitPhaseOfP).is_err());
        assert!(PerturbationSpec::new(
            0.1,
            PerturbationKind::ConstantComplex { value: c(0.2, 0.0) }
        )
        .is_err());
        let err = PerturbationSpec::new(
            1.0,
            PerturbationKind::Custom {
                values: vec![c(0.5, 0.5), c(1.0, 1.0)],
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::PerturbationBound { k: 1, .. }));
    }

    #[test]
    fn unit_phase_forcing_has_exact_modulus() {
        let params = CayleyParams::new(2.0, 0.5, c(0.0, 10.0)).unwrap();
        let spec = PerturbationSpec::new(0.7, PerturbationKind::UnitPhaseOfP).unwrap();
        for v in spec.forcing(&params, 100).unwrap() {
            assert!((cplx(v).norm() - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn custom_forcing_extends_by_zero() {
        let params = CayleyParams::new(2.0, 0.1, c(1.0, 0.0)).unwrap();
        let spec = PerturbationSpec::new(
            1.0,
            PerturbationKind::Custom {
                values: vec![c(0.5, 0.0)],
            },
        )
        .unwrap();
        let e = spec.forcing(&params, 3).unwrap();
        assert_eq!(cplx(e[0]), c(0.5, 0.0));
        assert!(e[1].is_zero() && e[2].is_zero());
    }

    #[test]
    fn spec_serializes_with_kind_tag() {
        let spec = PerturbationSpec::new(0.5, PerturbationKind::RandomPhase { seed: 9 }).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"epsilon":0.5,"kind":"random_phase","seed":9}"#);
    }
}
