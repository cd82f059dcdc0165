//! The quantum lattice `T = {1, q, q^2, ...}`.
//!
//! Points are addressed by their integer index `k`; the value `t = q^k` is
//! derived and kept as a [`ScaledReal`] so large indices never overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::ScaledReal;

pub const DEFAULT_K_MAX: u64 = 256;

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "q must be a finite real > 1, got {q}"
        )))
    }
}

/// `q^k` by binary powering in extended-exponent arithmetic.
fn scaled_pow(q: f64, k: u64) -> ScaledReal {
    let mut result = ScaledReal::ONE;
    let mut base = ScaledReal::from_f64(q);
    let mut n = k;
    while n > 0 {
        if n & 1 == 1 {
            result = result * base;
        }
        base = base * base;
        n >>= 1;
    }
    result
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    q: f64,
    k: u64,
    t: ScaledReal,
}

impl LatticePoint {
    pub fn new(q: f64, k: u64) -> Result<Self> {
        check_q(q)?;
        Ok(Self {
            q,
            k,
            t: scaled_pow(q, k),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn t(&self) -> ScaledReal {
        self.t
    }

    /// `t` as an `f64`, `None` past the double range.
    pub fn t_f64(&self) -> Option<f64> {
        self.t.to_f64()
    }

    /// `(q - 1) t`, the lattice step length at this point.
    pub fn step(&self) -> ScaledReal {
        self.t * ScaledReal::from_f64(self.q - 1.0)
    }

    pub fn successor(&self) -> Self {
        Self::new(self.q, self.k + 1).expect("q already validated")
    }
}

/// Shorthand for [`LatticePoint::new`].
pub fn point(q: f64, k: u64) -> Result<LatticePoint> {
    LatticePoint::new(q, k)
}

/// Finite prefix `k = 0..=k_max` of the lattice for a fixed `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeWindow {
    q: f64,
    k_max: u64,
}

impl LatticeWindow {
    pub fn new(q: f64, k_max: u64) -> Result<Self> {
        check_q(q)?;
        Ok(Self { q, k_max })
    }

    pub fn with_default_k_max(q: f64) -> Result<Self> {
        Self::new(q, DEFAULT_K_MAX)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    /// Number of points, `k_max + 1`.
    pub fn len(&self) -> usize {
        self.k_max as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: u64) -> LatticePoint {
        LatticePoint::new(self.q, k).expect("q already validated")
    }

    /// Points `k = 0..=k_max` in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..=self.k_max).map(move |k| self.point(k))
    }

    /// Same `q`, shorter or longer prefix.
    pub fn with_k_max(&self, k_max: u64) -> Self {
        Self { q: self.q, k_max }
    }

    /// Recovers `k` from `t = q^k`, or `None` if `t` is not a lattice value.
    pub fn index_of(&self, t: ScaledReal) -> Option<u64> {
        if t.is_sign_negative() || t.is_zero() {
            return None;
        }
        let k = (t.log2_abs() / self.q.log2()).round();
        if k < 0.0 {
            return None;
        }
        let k = k as u64;
        let expected = scaled_pow(self.q, k);
        let rel = (t - expected).abs().checked_div(expected).ok()?;
        (rel.to_f64_saturating() < 1e-9).then_some(k)
    }
}

/// All points of a window, `k = 0..=k_max`.
pub fn iterate(window: &LatticeWindow) -> Vec<LatticePoint> {
    window.iter().collect()
}
