//! Truncated summation of the geometrically decaying lattice series.
//!
//! Every infinite sum in the stability analysis has terms whose magnitudes
//! `a_m` satisfy `a_{m+1} / a_m -> eta / (1 - eta) < 1`. Summation stops when
//!
//! * three consecutive terms are below `tol_rel` times the running scale,
//! * the latest majorant ratio is below `rho = (eta / (1 - eta) + 1) / 2`, and
//! * the geometric tail bound `a_m rho / (1 - rho)` is below `tol_rel` times
//!   the running scale.
//!
//! The running scale is `|partial sum|`, floored at `tol_rel` times the sum
//! of majorants so that series with exactly cancelling or vanishing forcing
//! still terminate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::{ScaledComplex, ScaledReal};

pub const TAIL_TOL_REL: f64 = 1e-12;
pub const TERM_CAP: usize = 10_000;

/// How many terms were summed and the bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub terms_used: usize,
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationRule {
    pub tol_rel: f64,
    pub cap: usize,
    pub rho: f64,
}

impl TruncationRule {
    pub fn for_eta(eta: f64) -> Self {
        Self::with_tolerance(eta, TAIL_TOL_REL)
    }

    pub fn with_tolerance(eta: f64, tol_rel: f64) -> Self {
        Self {
            tol_rel,
            cap: TERM_CAP,
            rho: (eta / (1.0 - eta) + 1.0) / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub sum: ScaledComplex,
    pub majorant_sum: ScaledReal,
    pub truncation: Truncation,
}

/// Sums `term(i)` for `i = 0, 1, ...` under `rule`. Each call returns the
/// term and a majorant for its magnitude that follows the geometric decay.
pub fn sum_series<F>(rule: &TruncationRule, mut term: F) -> Result<SeriesSum>
where
    F: FnMut(usize) -> Result<(ScaledComplex, ScaledReal)>,
{
    let tol = ScaledReal::from_f64(rule.tol_rel);
    let rho = ScaledReal::from_f64(rule.rho);
    let tail_factor = ScaledReal::from_f64(rule.rho / (1.0 - rule.rho));
    let mut partial = ScaledComplex::ZERO;
    let mut majorant_sum = ScaledReal::ZERO;
    let mut previous: Option<ScaledReal> = None;
    let mut small_run = 0usize;
    let mut last = (ScaledComplex::ZERO, ScaledReal::ZERO);

    for i in 0..rule.cap {
        let (t, majorant) = term(i)?;
        last = (t, majorant);
        partial += t;
        majorant_sum = majorant_sum + majorant;
        let scale = partial.abs().max(tol * majorant_sum);
        let threshold = tol * scale;

        if t.abs() < threshold || (t.is_zero() && threshold.is_zero()) {
            small_run += 1;
        } else {
            small_run = 0;
        }
        let ratio_ok = previous.is_some_and(|p| majorant < rho * p || majorant.is_zero());
        let bound = majorant * tail_factor;
        let bound_ok = bound < threshold || bound.is_zero();
        if small_run >= 3 && ratio_ok && bound_ok {
            return Ok(SeriesSum {
                sum: partial,
                majorant_sum,
                truncation: Truncation {
                    terms_used: i + 1,
                    tail_bound: bound.to_f64_saturating(),
                },
            });
        }
        previous = Some(majorant);
    }
    Err(Error::TruncationCap {
        cap: rule.cap,
        last_term: last.1.to_f64_saturating(),
        partial: partial.abs().to_f64_saturating(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(r: f64) -> impl FnMut(usize) -> Result<(ScaledComplex, ScaledReal)> {
        move |i| {
            let a = r.powi(i as i32);
            Ok((ScaledComplex::from_real(a), ScaledReal::from_f64(a.abs())))
        }
    }

    #[test]
    fn geometric_series_sum() {
        let rule = TruncationRule::for_eta(0.25);
        let s = sum_series(&rule, geometric(1.0 / 3.0)).unwrap();
        let v = s.sum.to_complex().unwrap().re;
        assert!((v - 1.5).abs() < 1e-12 * 1.5);
        assert!(s.truncation.tail_bound < 1e-12 * 1.5);
    }

    #[test]
    fn alternating_series_sum() {
        let rule = TruncationRule::for_eta(0.4);
        let s = sum_series(&rule, geometric(-2.0 / 3.0)).unwrap();
        let v = s.sum.to_complex().unwrap().re;
        assert!((v - 0.6).abs() < 1e-12);
    }

    #[test]
    fn vanishing_forcing_terminates() {
        let rule = TruncationRule::for_eta(0.45);
        let s = sum_series(&rule, |i| {
            Ok((
                ScaledComplex::ZERO,
                ScaledReal::from_f64(0.8f64.powi(i as i32)),
            ))
        })
        .unwrap();
        assert!(s.sum.is_zero());
        assert!(s.truncation.terms_used < 400);
    }

    #[test]
    fn non_decaying_series_hits_the_cap() {
        let rule = TruncationRule::for_eta(0.0);
        let err = sum_series(&rule, |_| Ok((ScaledComplex::ONE, ScaledReal::ONE))).unwrap_err();
        assert!(matches!(err, Error::TruncationCap { cap: TERM_CAP, .. }));
    }

    #[test]
    fn growth_before_decay_is_not_cut_short() {
        // terms rise for 50 steps before the geometric regime sets in
        let rule = TruncationRule::for_eta(0.0);
        let term = |i: usize| {
            let a = if i < 50 {
                1e-20 * 2f64.powi(i as i32)
            } else {
                1e-20 * 2f64.powi(50) * 0.1f64.powi(i as i32 - 50)
            };
            Ok((ScaledComplex::from_real(a), ScaledReal::from_f64(a)))
        };
        let s = sum_series(&rule, term).unwrap();
        assert!(s.truncation.terms_used > 50);
    }
}
