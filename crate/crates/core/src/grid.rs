//! Seeded random parameter grids for property sweeps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{CayleyParams, Validity};
use crate::error::{Error, Result};

/// Resampling attempts before a grid is declared degenerate.
pub const MAX_RESAMPLES: usize = 1000;

/// Closed or half-open interval `[lo, hi]` used for uniform sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn check(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::InvalidParameter(format!(
                "{name} range [{}, {}] is not a finite interval",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    // u in [0, 1) maps to (lo, hi], so the upper end is attainable and the
    // lower end is not; q = 1 is excluded this way.
    fn sample_upper_closed(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        self.hi - (self.hi - self.lo) * u
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        self.lo + (self.hi - self.lo) * u
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    /// Sampled as `(lo, hi]`.
    pub q: Range,
    pub eta: Range,
    pub w_abs: Range,
    pub w_arg: Range,
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self {
            q: Range::new(1.0, 3.0),
            eta: Range::new(0.0, 0.45),
            w_abs: Range::new(0.1, 10.0),
            w_arg: Range::new(0.0, std::f64::consts::TAU),
        }
    }
}

/// One accepted draw and the number of rejected candidates before it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub params: CayleyParams,
    pub resamples: usize,
}

impl ParamGrid {
    pub fn check(&self) -> Result<()> {
        self.q.check("q")?;
        self.eta.check("eta")?;
        self.w_abs.check("|w|")?;
        self.w_arg.check("arg w")?;
        if self.q.lo < 1.0 || self.q.hi <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "q range must lie in (1, inf), got ({}, {}]",
                self.q.lo, self.q.hi
            )));
        }
        if self.eta.lo < 0.0 || self.eta.hi >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "eta range must lie in [0, 1/2), got [{}, {}]",
                self.eta.lo, self.eta.hi
            )));
        }
        if self.w_abs.lo <= 0.0 {
            return Err(Error::InvalidParameter("|w| range must be positive".into()));
        }
        Ok(())
    }

    /// Draws parameters until one is not Forbidden.
    pub fn draw(&self, rng: &mut impl Rng) -> Result<Draw> {
        for resamples in 0..MAX_RESAMPLES {
            let q = self.q.sample_upper_closed(rng);
            let eta = self.eta.sample(rng);
            let w = Complex64::from_polar(self.w_abs.sample(rng), self.w_arg.sample(rng));
            let params = CayleyParams::new(q, eta, w)?;
            if !matches!(params.validity, Validity::Forbidden { .. }) {
                return Ok(Draw { params, resamples });
            }
        }
        Err(Error::InvalidParameter(format!(
            "no admissible parameters after {MAX_RESAMPLES} draws"
        )))
    }

    /// `n` draws from a generator seeded with `seed`.
    pub fn draws(&self, seed: u64, n: usize) -> Result<Vec<Draw>> {
        self.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}
