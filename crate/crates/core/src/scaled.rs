//! Extended-exponent complex and real numbers.
//!
//! A [`ScaledComplex`] stores a double-precision complex mantissa together
//! with a separate binary exponent, so the represented value is
//! `mantissa * 2^exp2`. Products over the quantum lattice grow like
//! `q^{k^2/2}` when `eta = 0`, which leaves the `f64` range after a few dozen
//! steps; carrying the exponent separately keeps every intermediate finite.
//!
//! Normalized form: either the value is zero (mantissa `0`, exponent `0`) or
//! `1 <= |mantissa| < 2`. Every constructor and every arithmetic result is
//! normalized.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent gap beyond which the smaller addend no longer affects the sum.
pub const ABSORPTION_GAP: i64 = 64;

/// Largest binary exponent whose normalized values still fit in an `f64`.
const MAX_F64_EXP2: i64 = 1023;

/// Below this exponent every normalized value flushes to zero in an `f64`.
const MIN_F64_EXP2: i64 = -1076;

fn scale_pow2(x: f64, n: i64) -> f64 {
    let n = n.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    libm::scalbn(x, n)
}

/// Complex number with an unbounded binary exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ScaledRecord", into = "ScaledRecord")]
pub struct ScaledComplex {
    mantissa: Complex64,
    exp2: i64,
}

/// Wire format: `{"re": m_re, "im": m_im, "exp2": e}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct ScaledRecord {
    re: f64,
    im: f64,
    exp2: i64,
}

impl From<ScaledRecord> for ScaledComplex {
    fn from(r: ScaledRecord) -> Self {
        ScaledComplex::from_parts(Complex64::new(r.re, r.im), r.exp2)
    }
}

impl From<ScaledComplex> for ScaledRecord {
    fn from(z: ScaledComplex) -> Self {
        ScaledRecord {
            re: z.mantissa.re,
            im: z.mantissa.im,
            exp2: z.exp2,
        }
    }
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        mantissa: Complex64::new(0.0, 0.0),
        exp2: 0,
    };

    pub const ONE: Self = Self {
        mantissa: Complex64::new(1.0, 0.0),
        exp2: 0,
    };

    /// Builds `mantissa * 2^exp2` and normalizes it. The mantissa must be finite.
    pub fn from_parts(mantissa: Complex64, exp2: i64) -> Self {
        debug_assert!(mantissa.is_finite(), "non-finite mantissa {mantissa}");
        let (re, im) = (mantissa.re, mantissa.im);
        if re == 0.0 && im == 0.0 {
            return Self::ZERO;
        }
        let big = re.abs().max(im.abs());
        let (_, ex) = libm::frexp(big);
        let mut re = libm::scalbn(re, -ex);
        let mut im = libm::scalbn(im, -ex);
        let mut exp2 = exp2.saturating_add(ex as i64);
        // largest component now in [0.5, 1), so |m| is in [0.5, sqrt 2)
        if re.hypot(im) < 1.0 {
            re *= 2.0;
            im *= 2.0;
            exp2 = exp2.saturating_sub(1);
        }
        Self {
            mantissa: Complex64::new(re, im),
            exp2,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::from_parts(z, 0)
    }

    pub fn try_from_complex(z: Complex64) -> Result<Self> {
        if z.is_finite() {
            Ok(Self::from_complex(z))
        } else {
            Err(Error::InvalidParameter(format!(
                "non-finite complex value {z}"
            )))
        }
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_parts(Complex64::new(x, 0.0), 0)
    }

    pub fn new(re: f64, im: f64) -> Self {
        Self::from_parts(Complex64::new(re, im), 0)
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_normalized(&self) -> bool {
        if self.is_zero() {
            return self.exp2 == 0;
        }
        let m = self.mantissa.norm();
        (0.5..2.0).contains(&m)
    }

    /// Re-applies normalization; a no-op for every value this type produces.
    pub fn normalized(self) -> Self {
        Self::from_parts(self.mantissa, self.exp2)
    }

    pub fn conj(self) -> Self {
        Self {
            mantissa: self.mantissa.conj(),
            exp2: self.exp2,
        }
    }

    /// Multiplication by a real `f64` factor.
    pub fn scale(self, factor: f64) -> Self {
        self * Self::from_real(factor)
    }

    /// Multiplication by an ordinary complex factor.
    pub fn mul_complex(self, factor: Complex64) -> Self {
        self * Self::from_complex(factor)
    }

    /// Multiplication by `2^n`, exact.
    pub fn mul_pow2(self, n: i64) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            mantissa: self.mantissa,
            exp2: self.exp2.saturating_add(n),
        }
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::ZERO);
        }
        Ok(Self::from_parts(
            self.mantissa / rhs.mantissa,
            self.exp2.saturating_sub(rhs.exp2),
        ))
    }

    pub fn recip(self) -> Result<Self> {
        Self::ONE.checked_div(self)
    }

    pub fn abs(&self) -> ScaledReal {
        if self.is_zero() {
            return ScaledReal::ZERO;
        }
        ScaledReal::from_parts(self.mantissa.norm(), self.exp2)
    }

    /// `log2 |z|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.exp2 as f64 + self.mantissa.norm().log2()
    }

    /// Argument in `(-pi, pi]`; unaffected by the exponent.
    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// The value as an ordinary complex number, or `None` if it exceeds the
    /// `f64` range. Values below the range flush towards zero.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if self.exp2 > MAX_F64_EXP2 {
            return None;
        }
        if self.exp2 < MIN_F64_EXP2 {
            return Some(Complex64::new(
                0.0 * self.mantissa.re,
                0.0 * self.mantissa.im,
            ));
        }
        Some(Complex64::new(
            scale_pow2(self.mantissa.re, self.exp2),
            scale_pow2(self.mantissa.im, self.exp2),
        ))
    }

    /// True when the value fits in an `f64` complex without overflow.
    pub fn fits_f64(&self) -> bool {
        self.to_complex().is_some()
    }
}

impl Mul for ScaledComplex {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(
            self.mantissa * rhs.mantissa,
            self.exp2.saturating_add(rhs.exp2),
        )
    }
}

impl MulAssign for ScaledComplex {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Add for ScaledComplex {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (hi, lo) = if self.exp2 >= rhs.exp2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap = hi.exp2 - lo.exp2;
        if gap > ABSORPTION_GAP {
            return hi;
        }
        let aligned = Complex64::new(
            libm::scalbn(lo.mantissa.re, -(gap as i32)),
            libm::scalbn(lo.mantissa.im, -(gap as i32)),
        );
        Self::from_parts(hi.mantissa + aligned, hi.exp2)
    }
}

impl AddAssign for ScaledComplex {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Neg for ScaledComplex {
    type Output = Self;

    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            mantissa: -self.mantissa,
            exp2: self.exp2,
        }
    }
}

impl Sub for ScaledComplex {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sum for ScaledComplex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, z| acc + z)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl fmt::Display for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_complex() {
            Some(z) => write!(f, "{z}"),
            None => write!(f, "({})*2^{}", self.mantissa, self.exp2),
        }
    }
}

/// Real number with an unbounded binary exponent, `mantissa * 2^exp2`.
///
/// Normalized like [`ScaledComplex`]: zero, or `1 <= |mantissa| < 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledReal {
    mantissa: f64,
    exp2: i64,
}

impl Default for ScaledReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl ScaledReal {
    pub const ZERO: Self = Self {
        mantissa: 0.0,
        exp2: 0,
    };

    pub const ONE: Self = Self {
        mantissa: 1.0,
        exp2: 0,
    };

    pub fn from_parts(mantissa: f64, exp2: i64) -> Self {
        debug_assert!(mantissa.is_finite(), "non-finite mantissa {mantissa}");
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        let (f, ex) = libm::frexp(mantissa);
        // f in [0.5, 1)
        Self {
            mantissa: f * 2.0,
            exp2: exp2.saturating_add(ex as i64 - 1),
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_parts(x, 0)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_sign_negative(&self) -> bool {
        self.mantissa < 0.0
    }

    pub fn abs(self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exp2: self.exp2,
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        if self.exp2 > MAX_F64_EXP2 {
            return None;
        }
        Some(scale_pow2(self.mantissa, self.exp2))
    }

    /// Like [`to_f64`](Self::to_f64) but saturating to `±f64::MAX`.
    pub fn to_f64_saturating(&self) -> f64 {
        self.to_f64().unwrap_or(if self.is_sign_negative() {
            f64::MIN
        } else {
            f64::MAX
        })
    }

    /// `log2 |x|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.exp2 as f64 + self.mantissa.abs().log2()
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::ZERO);
        }
        Ok(Self::from_parts(
            self.mantissa / rhs.mantissa,
            self.exp2.saturating_sub(rhs.exp2),
        ))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_complex(self) -> ScaledComplex {
        ScaledComplex::from_parts(Complex64::new(self.mantissa, 0.0), self.exp2)
    }
}

impl Mul for ScaledReal {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(
            self.mantissa * rhs.mantissa,
            self.exp2.saturating_add(rhs.exp2),
        )
    }
}

impl Add for ScaledReal {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (hi, lo) = if self.exp2 >= rhs.exp2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap = hi.exp2 - lo.exp2;
        if gap > ABSORPTION_GAP {
            return hi;
        }
        Self::from_parts(
            hi.mantissa + libm::scalbn(lo.mantissa, -(gap as i32)),
            hi.exp2,
        )
    }
}

impl Neg for ScaledReal {
    type Output = Self;

    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            mantissa: -self.mantissa,
            exp2: self.exp2,
        }
    }
}

impl Sub for ScaledReal {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sign = |x: &Self| {
            if x.is_zero() {
                0
            } else if x.is_sign_negative() {
                -1
            } else {
                1
            }
        };
        let (sa, sb) = (sign(self), sign(other));
        if sa != sb || sa == 0 {
            return sa.partial_cmp(&sb);
        }
        let by_magnitude = self
            .exp2
            .cmp(&other.exp2)
            .then(self.mantissa.abs().total_cmp(&other.mantissa.abs()));
        Some(if sa > 0 {
            by_magnitude
        } else {
            by_magnitude.reverse()
        })
    }
}

impl From<f64> for ScaledReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Display for ScaledReal {
    /// Decimal scientific notation, valid far outside the `f64` range.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(x) = self.to_f64().filter(|x| *x != 0.0 || self.is_zero()) {
            return write!(f, "{x:e}");
        }
        let log10 = self.log2_abs() * std::f64::consts::LOG10_2;
        let mut exponent = log10.floor();
        let mut digits = 10f64.powf(log10 - exponent);
        if digits >= 10.0 {
            digits /= 10.0;
            exponent += 1.0;
        }
        let sign = if self.is_sign_negative() { "-" } else { "" };
        write!(f, "{sign}{digits:.15}e{exponent}")
    }
}
