//! Hyers-Ulam stability of the Cayley quantum equation for `w != 0`,
//! `0 <= eta < 1/2`.
//!
//! Given `phi` with `|D_q phi - w <phi>_eta| <= epsilon`, the exact solution
//! `x = x0 P` with `x0 = lim phi / P` is the only one that stays within a
//! bounded distance of `phi`. Reports measure that distance against the
//! claimed constant `epsilon / |w|`, which `phi = epsilon / w` attains.
//!
//! The claimed constant is not an upper bound in general. Since
//! `P(t) sum_{m>=k} u_m = 1 / w` is a sum of complex terms, the triangle
//! inequality only gives `epsilon sup_k |P(q^k)| sum_{m>=k} |u_m|`, which
//! equals `epsilon / |w|` when every term has the same phase (real `w > 0`,
//! `eta = 0`) and exceeds it otherwise. Forcing aligned with the phases of
//! the terms reaches it, so reports carry this majorant bound as well.
//!
//! The deviation `phi - x0 P` equals `-P(t)` times the tail of the series for
//! `S`, and it is evaluated in that form. Subtracting `x0 P` from `phi`
//! directly loses every significant digit once `|P|` is large.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{residual, residual_scale, CayleyParams};
use crate::error::{Error, Result};
use crate::precise::{backward_tails, plan_tails, TailPlan};
pub use crate::precise::{majorant_profile, EXTENDED_PRECISION_THRESHOLD};
use crate::scaled::{ScaledComplex, ScaledReal};
use crate::series::{sum_series, Truncation, TruncationRule};
use crate::solutions::{NormalizedTerms, PerturbationSpec, Recurrence, SolutionBundle, Step};

/// Relative slack on `sup_deviation <= epsilon / |w|`.
pub const BOUND_SLACK: f64 = 1e-9;
/// Largest index at which `w psi - 1` is probed.
pub const IDENTITY_PROBE_MAX_K: u64 = 32;
/// Residual premise check: allowance, relative to the operand scale, for
/// rounding in the stored trajectory.
pub const PREMISE_ROUNDING_ALLOWANCE: f64 = 1e-10;
/// Truncation tolerance for the deviation tails, tighter than the default
/// so the sharp case is resolved to well below `1e-12`.
const DEVIATION_TAIL_TOL: f64 = 1e-15;
/// Working precision, in bits, of the double-precision path.
pub const DOUBLE_PRECISION_BITS: usize = 53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundHolds,
    BoundViolated,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HusReport {
    pub params: CayleyParams,
    pub epsilon: f64,
    /// Shadowing coefficient `lim phi / P`.
    pub x0: Complex64,
    /// `max_k |phi(q^k) - x0 P(q^k)|` over the window.
    pub sup_deviation: f64,
    /// Index attaining `sup_deviation`.
    pub sup_index: u64,
    /// `epsilon / |w|`.
    pub bound: f64,
    /// `epsilon sup_k |P(q^k)| sum_{m>=k} |u_m|`, the bound the triangle
    /// inequality guarantees.
    pub majorant_bound: f64,
    /// `max_{k <= min(k_max, 32)} |w psi(q^k) - 1|`.
    pub identity_error: f64,
    pub verdict: Verdict,
    pub truncation: Truncation,
    /// Bits of working precision used for the deviation tails.
    pub precision_bits: usize,
}

impl HusReport {
    /// Placeholder report for parameters outside the stable regime.
    pub fn not_applicable(params: &CayleyParams, epsilon: f64) -> Self {
        Self {
            params: *params,
            epsilon,
            x0: Complex64::new(f64::NAN, f64::NAN),
            sup_deviation: f64::NAN,
            sup_index: 0,
            bound: epsilon / params.w.norm(),
            majorant_bound: f64::NAN,
            identity_error: f64::NAN,
            verdict: Verdict::NotApplicable,
            truncation: Truncation {
                terms_used: 0,
                tail_bound: f64::NAN,
            },
            precision_bits: 0,
        }
    }

    /// `sup_deviation / bound`.
    pub fn bound_ratio(&self) -> f64 {
        self.sup_deviation / self.bound
    }
}

fn to_complex(z: ScaledComplex, what: &str) -> Result<Complex64> {
    z.to_complex()
        .ok_or_else(|| Error::InvalidParameter(format!("{what} exceeds the double range")))
}

/// `psi(t)` together with how the series was truncated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub value: Complex64,
    pub truncation: Truncation,
    pub precision_bits: usize,
}

/// `psi(q^k) = P(q^k) sum_{m>=k} (q-1)q^m / ([1 + w(1-eta)(q-1)q^m] P(q^m))`,
/// identically `1 / w`.
///
/// Ill-conditioned coefficients, whose terms dwarf `1 / |w|`, are summed in
/// extended precision.
pub fn tail_sum_psi(params: &CayleyParams, k: u64) -> Result<TailSum> {
    params.require_stable_regime()?;
    let plan = plan_tails(params, k)?;
    if let Some((far, bits)) = plan.extended {
        let tails = backward_tails(params, k as usize, far, bits, |_| Ok(ScaledComplex::ONE))?;
        return Ok(TailSum {
            value: to_complex(tails[k as usize], "psi")?,
            truncation: Truncation {
                terms_used: far - k as usize,
                tail_bound: plan.tail_bound.to_f64_saturating(),
            },
            precision_bits: bits,
        });
    }
    let rule = TruncationRule::for_eta(params.eta);
    let mut terms = NormalizedTerms::from(params, k)?;
    let s = sum_series(&rule, |_| {
        let (_, t) = terms.next_term()?;
        Ok((t, t.abs()))
    })?;
    Ok(TailSum {
        value: to_complex(s.sum, "psi")?,
        truncation: s.truncation,
        precision_bits: DOUBLE_PRECISION_BITS,
    })
}

/// `a_{m+1} / a_m` for `m = 0..k_max-1`, where
/// `a_m = |(q-1)q^m / ([1 + w(1-eta)(q-1)q^m] P(q^m))|`.
pub fn term_ratio_profile(params: &CayleyParams, k_max: u64) -> Result<Vec<f64>> {
    params.require_stable_regime()?;
    let magnitudes: Vec<ScaledReal> = Recurrence::new(params)?
        .take(k_max as usize + 1)
        .map(|s| s.series_coefficient().abs())
        .collect();
    magnitudes
        .windows(2)
        .map(|pair| Ok(pair[1].checked_div(pair[0])?.to_f64_saturating()))
        .collect()
}

/// Smallest `m0` such that every ratio from `m0` on is within `tol` of `limit`.
pub fn ratio_burn_in(profile: &[f64], limit: f64, tol: f64) -> Option<usize> {
    let last_bad = profile.iter().rposition(|r| (r - limit).abs() >= tol);
    match last_bad {
        None => Some(0),
        Some(i) if i + 1 < profile.len() => Some(i + 1),
        Some(_) => None,
    }
}

/// The limit `eta / (1 - eta)` of the term ratios.
pub fn ratio_limit(eta: f64) -> f64 {
    eta / (1.0 - eta)
}

/// Lazily extended forcing values `E(q^m)` for an unbounded range of `m`.
struct ForcingStream<'a> {
    spec: &'a PerturbationSpec,
    params: &'a CayleyParams,
    cache: Vec<ScaledComplex>,
}

impl<'a> ForcingStream<'a> {
    fn new(spec: &'a PerturbationSpec, params: &'a CayleyParams, initial: usize) -> Result<Self> {
        Ok(Self {
            spec,
            params,
            cache: spec.forcing(params, initial.max(16))?,
        })
    }

    fn get(&mut self, m: usize) -> Result<ScaledComplex> {
        if m >= self.cache.len() {
            let n = (2 * self.cache.len()).max(m + 1);
            self.cache = self.spec.forcing(self.params, n)?;
        }
        Ok(self.cache[m])
    }
}

/// Shadowing coefficient and the limit of `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shadow {
    pub x0: Complex64,
    pub s_limit: Complex64,
    pub truncation: Truncation,
    pub precision_bits: usize,
}

fn check_bundle(params: &CayleyParams, bundle: &SolutionBundle) -> Result<()> {
    params.require_stable_regime()?;
    if bundle.params != *params {
        return Err(Error::InvalidParameter(
            "bundle was built for different parameters".into(),
        ));
    }
    Ok(())
}

/// `x0 = c + lim S`, summing the series of `S` to convergence.
pub fn extract_shadow(params: &CayleyParams, bundle: &SolutionBundle) -> Result<Shadow> {
    check_bundle(params, bundle)?;
    let plan = plan_tails(params, 0)?;
    if let Some((far, bits)) = plan.extended {
        let mut forcing = ForcingStream::new(&bundle.perturbation, params, far)?;
        let tails = backward_tails(params, 0, far, bits, |m| forcing.get(m))?;
        let s_limit = to_complex(tails[0], "lim S")?;
        return Ok(Shadow {
            x0: bundle.c + s_limit,
            s_limit,
            truncation: Truncation {
                terms_used: far,
                tail_bound: plan.tail_bound.to_f64_saturating() * bundle.perturbation.epsilon,
            },
            precision_bits: bits,
        });
    }
    let rule = TruncationRule::for_eta(params.eta);
    let eps = ScaledReal::from_f64(bundle.perturbation.epsilon);
    let mut forcing = ForcingStream::new(&bundle.perturbation, params, bundle.window().len())?;
    let mut steps = Recurrence::new(params)?;
    let s = sum_series(&rule, |m| {
        let coefficient = steps
            .next()
            .expect("recurrence is unbounded")
            .series_coefficient();
        Ok((coefficient * forcing.get(m)?, eps * coefficient.abs()))
    })?;
    let s_limit = to_complex(s.sum, "lim S")?;
    Ok(Shadow {
        x0: bundle.c + s_limit,
        s_limit,
        truncation: s.truncation,
        precision_bits: DOUBLE_PRECISION_BITS,
    })
}

/// `P(q^k) sum_{m>=k} coefficient(m) E(q^m)` for `k = 0..=k_max`; the
/// deviation is `phi - x0 P = -(this)`.
///
/// The series is first run from `k_max` to find where it may be cut, then
/// the suffix sums are accumulated from the far end towards `k = 0`.
pub fn deviation_profile(
    params: &CayleyParams,
    bundle: &SolutionBundle,
) -> Result<Vec<ScaledComplex>> {
    check_bundle(params, bundle)?;
    let plan = plan_tails(params, bundle.window().k_max())?;
    deviation_tails(params, bundle, &plan)
}

fn deviation_tails(
    params: &CayleyParams,
    bundle: &SolutionBundle,
    plan: &TailPlan,
) -> Result<Vec<ScaledComplex>> {
    let k_max = bundle.window().k_max();
    let mut forcing = ForcingStream::new(&bundle.perturbation, params, bundle.window().len())?;
    if let Some((far, bits)) = plan.extended {
        return backward_tails(params, k_max as usize, far, bits, |m| forcing.get(m));
    }
    let eps = ScaledReal::from_f64(bundle.perturbation.epsilon);

    let rule = TruncationRule::with_tolerance(params.eta, DEVIATION_TAIL_TOL);
    let mut terms = NormalizedTerms::from(params, k_max)?;
    let tail = sum_series(&rule, |i| {
        let (_, t) = terms.next_term()?;
        Ok((t * forcing.get(k_max as usize + i)?, eps * t.abs()))
    })?;
    let far = k_max as usize + tail.truncation.terms_used;

    let steps: Vec<Step> = Recurrence::new(params)?.take(far).collect();
    let mut suffix = ScaledComplex::ZERO;
    let mut out = vec![ScaledComplex::ZERO; k_max as usize + 1];
    for m in (0..far).rev() {
        suffix += steps[m].series_coefficient() * forcing.get(m)?;
        if m <= k_max as usize {
            out[m] = steps[m].p * suffix;
        }
    }
    Ok(out)
}

/// Checks `|D_q phi - w <phi>_eta| <= epsilon` on the window, allowing for
/// rounding proportional to the cancelling operands.
pub fn check_premise(params: &CayleyParams, bundle: &SolutionBundle, epsilon: f64) -> Result<()> {
    let e = residual(params, &bundle.phi)?;
    let scale = residual_scale(params, &bundle.phi)?;
    let limit = ScaledReal::from_f64(epsilon * (1.0 + BOUND_SLACK));
    let allowance = ScaledReal::from_f64(PREMISE_ROUNDING_ALLOWANCE);
    for (k, (v, s)) in e.values().iter().zip(&scale).enumerate() {
        if v.abs() > limit + allowance * *s {
            return Err(Error::PremiseViolated {
                k: k as u64,
                magnitude: v.abs().to_f64_saturating(),
                epsilon,
            });
        }
    }
    Ok(())
}

/// Measures `sup |phi - x0 P|` against `epsilon / |w|`.
pub fn certify(params: &CayleyParams, bundle: &SolutionBundle, epsilon: f64) -> Result<HusReport> {
    check_bundle(params, bundle)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if bundle.perturbation.epsilon > epsilon * (1.0 + BOUND_SLACK) {
        return Err(Error::PremiseViolated {
            k: 0,
            magnitude: bundle.perturbation.epsilon,
            epsilon,
        });
    }
    check_premise(params, bundle, epsilon)?;

    let shadow = extract_shadow(params, bundle)?;
    let plan = plan_tails(params, bundle.window().k_max())?;
    let deviations = deviation_tails(params, bundle, &plan)?;
    let (sup_index, sup) = deviations.iter().map(|d| d.abs()).enumerate().fold(
        (0, ScaledReal::ZERO),
        |best, (k, d)| if d > best.1 { (k, d) } else { best },
    );
    let sup_deviation = sup.to_f64_saturating();

    let probe_max = bundle.window().k_max().min(IDENTITY_PROBE_MAX_K);
    let identity_error = identity_errors(params, probe_max)?
        .into_iter()
        .fold(0.0, f64::max);

    let majorant_bound = plan.conditioning.to_f64_saturating() / params.w.norm() * epsilon;

    let bound = epsilon / params.w.norm();
    let verdict = if sup_deviation <= bound * (1.0 + BOUND_SLACK) {
        Verdict::BoundHolds
    } else {
        Verdict::BoundViolated
    };
    Ok(HusReport {
        params: *params,
        epsilon,
        x0: shadow.x0,
        sup_deviation,
        sup_index: sup_index as u64,
        bound,
        majorant_bound,
        identity_error,
        verdict,
        truncation: shadow.truncation,
        precision_bits: plan
            .extended
            .map_or(DOUBLE_PRECISION_BITS, |(_, bits)| bits),
    })
}

/// `|w psi(q^k) - 1|` for `k = 0..=k_max`.
pub fn identity_errors(params: &CayleyParams, k_max: u64) -> Result<Vec<f64>> {
    (0..=k_max)
        .map(|k| Ok((params.w * tail_sum_psi(params, k)?.value - 1.0).norm()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessEvidence {
    pub delta: Complex64,
    /// `2 epsilon / |w|`.
    pub threshold: f64,
    /// First index where `|phi - (x0 + delta) P|` exceeds the threshold.
    pub violation_index: Option<u64>,
    pub deviation_at_violation: Option<f64>,
    /// Last index examined (the window end when no violation was found).
    pub checked_up_to: u64,
}

/// Shows that the shifted candidate `(x0 + delta) P` eventually leaves the
/// `2 epsilon / |w|` band around `phi`, because `|P| -> infinity`.
pub fn uniqueness_probe(
    params: &CayleyParams,
    bundle: &SolutionBundle,
    delta: Complex64,
) -> Result<UniquenessEvidence> {
    check_bundle(params, bundle)?;
    if delta == Complex64::new(0.0, 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(
            "delta must be a nonzero finite complex".into(),
        ));
    }
    let threshold = 2.0 * bundle.perturbation.epsilon / params.w.norm();
    let limit = ScaledReal::from_f64(threshold);
    let deviations = deviation_profile(params, bundle)?;
    let delta = ScaledComplex::from_complex(delta);
    let hit = deviations
        .iter()
        .zip(bundle.p.values())
        .map(|(d, p)| (*d + delta * *p).abs())
        .enumerate()
        .find(|(_, dev)| *dev > limit);
    Ok(UniquenessEvidence {
        delta: to_complex(delta, "delta")?,
        threshold,
        violation_index: hit.map(|(k, _)| k as u64),
        deviation_at_violation: hit.map(|(_, d)| d.to_f64_saturating()),
        checked_up_to: hit.map_or(bundle.window().k_max(), |(k, _)| k as u64),
    })
}
