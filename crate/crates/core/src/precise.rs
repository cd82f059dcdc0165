//! Arbitrary-precision evaluation of `T_k = P(q^k) sum_{m>=k} u_m E(q^m)`.
//!
//! When `|P|` dips by many orders of magnitude before growing, the terms of
//! `T_k` exceed the sum itself by the same factor and cancel, so double
//! precision loses every digit. The backward recurrence
//! `T_k = weight_k E_k + T_{k+1} / r_k` is exact in exact arithmetic and its
//! rounding errors are amplified by at most that conditioning factor, so it
//! is run with enough extra bits to absorb it.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use num_complex::Complex64;

use crate::cayley::CayleyParams;
use crate::error::{Error, Result};
use crate::scaled::{ScaledComplex, ScaledReal};
use crate::series::{sum_series, TruncationRule, TERM_CAP};
use crate::solutions::{Anchor, NormalizedTerms, Recurrence, Step};

/// Conditioning `|w| sup_k |P(q^k)| sum_{m>=k} |u_m|` above which the tail
/// sums are evaluated in extended precision.
pub const EXTENDED_PRECISION_THRESHOLD: f64 = 8.0;
/// Where the extended-precision tails are cut, relative to `1 / |w|`.
pub(crate) const EXTENDED_TAIL_TOL: f64 = 1e-20;
/// Truncation tolerance for the majorant tails.
const MAJORANT_TAIL_TOL: f64 = 1e-15;

type F = FBig<HalfEven>;

fn real(x: f64, precision: usize) -> F {
    F::try_from(x)
        .expect("finite input")
        .with_precision(precision)
        .value()
}

#[derive(Clone, Debug)]
struct Big {
    re: F,
    im: F,
}

impl Big {
    fn new(z: Complex64, precision: usize) -> Self {
        Self {
            re: real(z.re, precision),
            im: real(z.im, precision),
        }
    }

    fn from_scaled(z: ScaledComplex, precision: usize) -> Self {
        let m = Big::new(z.mantissa(), precision);
        let e = z.exp2() as isize;
        Self {
            re: m.re << e,
            im: m.im << e,
        }
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn scale(&self, x: &F) -> Self {
        Self {
            re: &self.re * x,
            im: &self.im * x,
        }
    }

    fn div(&self, o: &Self) -> Self {
        let norm = &o.re * &o.re + &o.im * &o.im;
        let num = self.mul(&Self {
            re: o.re.clone(),
            im: -o.im.clone(),
        });
        Self {
            re: num.re / &norm,
            im: num.im / norm,
        }
    }

    fn to_scaled(&self) -> ScaledComplex {
        let binade = |x: &F| {
            if x.repr().significand().is_zero() {
                None
            } else {
                Some(x.repr().exponent() + x.repr().digits() as isize)
            }
        };
        let e = match (binade(&self.re), binade(&self.im)) {
            (None, None) => return ScaledComplex::ZERO,
            (a, b) => a.max(b).unwrap(),
        };
        let re = (self.re.clone() >> e).to_f64().value();
        let im = (self.im.clone() >> e).to_f64().value();
        ScaledComplex::from_parts(Complex64::new(re, im), e as i64)
    }
}

/// `|P(q^k)| sum_{m>=k} |u_m|` for `k = 0..=k_max`: the largest deviation
/// per unit of forcing at each index.
pub fn majorant_profile(params: &CayleyParams, k_max: u64) -> Result<Vec<ScaledReal>> {
    params.require_stable_regime()?;
    let rule = TruncationRule::with_tolerance(params.eta, MAJORANT_TAIL_TOL);
    let mut terms = NormalizedTerms::from(params, k_max)?;
    let tail = sum_series(&rule, |_| {
        let (_, t) = terms.next_term()?;
        Ok((t.abs().to_complex(), t.abs()))
    })?;
    let far = k_max as usize + tail.truncation.terms_used;
    let steps: Vec<Step> = Recurrence::new(params)?.take(far).collect();
    let mut suffix = ScaledReal::ZERO;
    let mut out = vec![ScaledReal::ZERO; k_max as usize + 1];
    for m in (0..far).rev() {
        suffix = suffix + steps[m].series_coefficient().abs();
        if m <= k_max as usize {
            out[m] = steps[m].p.abs() * suffix;
        }
    }
    Ok(out)
}

/// How the tails `P(q^k) sum_{m>=k} u_m E(q^m)` for `k <= k_hi` are evaluated.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TailPlan {
    /// `|w| sup_{k <= k_hi} |P(q^k)| sum_{m>=k} |u_m|`
    pub conditioning: ScaledReal,
    /// `Some((far, bits))` when the extended path is needed: terms with
    /// `m < far` are summed at `bits` of precision.
    pub extended: Option<(usize, usize)>,
    /// Majorant of the omitted terms per unit forcing, when extended.
    pub tail_bound: ScaledReal,
}

pub(crate) fn plan_tails(params: &CayleyParams, k_hi: u64) -> Result<TailPlan> {
    let w_abs = ScaledReal::from_f64(params.w.norm());
    let conditioning = majorant_profile(params, k_hi)?
        .into_iter()
        .fold(ScaledReal::ZERO, ScaledReal::max)
        * w_abs;
    if conditioning <= ScaledReal::from_f64(EXTENDED_PRECISION_THRESHOLD) {
        return Ok(TailPlan {
            conditioning,
            extended: None,
            tail_bound: ScaledReal::ZERO,
        });
    }
    // cut once the majorant tail is below EXTENDED_TAIL_TOL / |w|
    let rule = TruncationRule::for_eta(params.eta);
    let rho = ScaledReal::from_f64(rule.rho);
    let tail_factor = ScaledReal::from_f64(rule.rho / (1.0 - rule.rho));
    let target = ScaledReal::from_f64(EXTENDED_TAIL_TOL).checked_div(w_abs)?;
    let mut terms = NormalizedTerms::from(params, k_hi)?;
    let mut previous: Option<ScaledReal> = None;
    let mut small_run = 0;
    for i in 0..TERM_CAP {
        let a = terms.next_term()?.1.abs();
        small_run = if a < target { small_run + 1 } else { 0 };
        let bound = a * tail_factor;
        if small_run >= 3 && previous.is_some_and(|p| a < rho * p) && bound < target {
            let far = k_hi as usize + i + 1;
            let bits = working_precision(conditioning, far);
            return Ok(TailPlan {
                conditioning,
                extended: Some((far, bits)),
                tail_bound: bound,
            });
        }
        previous = Some(a);
    }
    Err(Error::TruncationCap {
        cap: TERM_CAP,
        last_term: previous.map_or(f64::NAN, |p| p.to_f64_saturating()),
        partial: conditioning.to_f64_saturating(),
    })
}

/// Bits needed so that rounding, amplified by `conditioning` over `steps`
/// operations, stays below `2^-64` relative to the target scale.
pub(crate) fn working_precision(conditioning: ScaledReal, steps: usize) -> usize {
    let log2_cond = conditioning.log2_abs().max(0.0).ceil() as usize;
    let log2_steps = (steps.max(1) as f64).log2().ceil() as usize;
    64 + 8 + log2_cond + log2_steps
}

struct BigTails {
    /// `T_k` for `k = 0..=k_hi`
    tails: Vec<Big>,
    /// `r_k` for `k = 0..k_hi`
    ratios: Vec<Big>,
}

fn big_tails(
    params: &CayleyParams,
    k_hi: usize,
    far: usize,
    precision: usize,
    mut forcing: impl FnMut(usize) -> Result<ScaledComplex>,
) -> Result<BigTails> {
    let p = precision;
    let one = real(1.0, p);
    let q = real(params.q, p);
    let w = Big::new(params.w, p);
    let eta = real(params.eta, p);
    let w_eta = w.scale(&eta);
    let w_rest = w.scale(&(&one - &eta));
    let unit = Big::new(Complex64::new(1.0, 0.0), p);

    // forward pass for weight_m = s_m / num_m and 1 / r_m = den_m / num_m
    let mut s = &q - &one;
    let mut coefficients = Vec::with_capacity(far);
    let mut ratios = Vec::with_capacity(k_hi);
    for m in 0..far.max(k_hi) {
        let num = Big {
            re: &one + &w_rest.re * &s,
            im: &w_rest.im * &s,
        };
        let den = Big {
            re: &one - &w_eta.re * &s,
            im: -(&w_eta.im * &s),
        };
        if m < k_hi {
            ratios.push(num.div(&den));
        }
        let inv_num = unit.div(&num);
        coefficients.push((inv_num.scale(&s), den.mul(&inv_num)));
        s = &s * &q;
    }

    let mut tail = Big::new(Complex64::new(0.0, 0.0), p);
    let mut tails = vec![tail.clone(); k_hi + 1];
    for m in (0..far.max(k_hi + 1)).rev() {
        if m < far {
            let (weight, inv_ratio) = &coefficients[m];
            let e = Big::from_scaled(forcing(m)?, p);
            tail = weight.mul(&e).add(&tail.mul(inv_ratio));
        }
        if m <= k_hi {
            tails[m] = tail.clone();
        }
    }
    Ok(BigTails { tails, ratios })
}

/// `T_k` for `k = 0..=k_hi`, summing the terms with `m < far` at `precision`
/// bits. `forcing(m)` gives `E(q^m)`.
pub(crate) fn backward_tails(
    params: &CayleyParams,
    k_hi: usize,
    far: usize,
    precision: usize,
    forcing: impl FnMut(usize) -> Result<ScaledComplex>,
) -> Result<Vec<ScaledComplex>> {
    let big = big_tails(params, k_hi, far, precision, forcing)?;
    Ok(big.tails.iter().map(Big::to_scaled).collect())
}

/// `phi(q^k) = x0 P(q^k) - T_k` for `k = 0..=k_hi`, formed before rounding,
/// where `x0` is given directly or as `phi(1) + T_0`.
pub(crate) fn shadowed_trajectory(
    params: &CayleyParams,
    k_hi: usize,
    far: usize,
    precision: usize,
    forcing: &[ScaledComplex],
    anchor: Anchor,
) -> Result<Vec<ScaledComplex>> {
    let p = precision;
    let big = big_tails(params, k_hi, far, precision, |m| Ok(forcing[m]))?;
    let x0 = match anchor {
        Anchor::Initial(c) => Big::new(c, p).add(&big.tails[0]),
        Anchor::Shadow(x0) => Big::new(x0, p),
    };
    let mut product = Big::new(Complex64::new(1.0, 0.0), p);
    let mut phi = Vec::with_capacity(k_hi + 1);
    for k in 0..=k_hi {
        let t = &big.tails[k];
        let value = x0.mul(&product).add(&Big {
            re: -t.re.clone(),
            im: -t.im.clone(),
        });
        phi.push(value.to_scaled());
        if k < k_hi {
            product = product.mul(&big.ratios[k]);
        }
    }
    Ok(phi)
}
