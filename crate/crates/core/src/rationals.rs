//! Deterministic enumeration of distinct rationals inside a window.
//!
//! The unit interval is traversed in Calkin–Wilf order (every positive
//! rational appears exactly once, in lowest terms); terms in `(0, 1)` are kept
//! and mapped affinely onto the window in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};
use crate::power_arcs::Interval;

/// An exact rational with its nearest `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    pub exact: BigRational,
    pub value: f64,
}

impl Rational {
    pub fn numer(&self) -> &BigInt {
        self.exact.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.exact.denom()
    }
}

/// Calkin–Wilf sequence `1, 1/2, 2, 1/3, 3/2, 2/3, 3, …` as `(num, den)`.
#[derive(Debug, Clone)]
pub struct CalkinWilf {
    num: u64,
    den: u64,
}

impl Default for CalkinWilf {
    fn default() -> Self {
        CalkinWilf { num: 1, den: 1 }
    }
}

impl Iterator for CalkinWilf {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        let cur = (self.num, self.den);
        // x' = 1 / (2 floor(x) - x + 1)
        let fl = self.num / self.den;
        let new_den = (2 * fl + 1).checked_mul(self.den)?.checked_sub(self.num)?;
        self.num = self.den;
        self.den = new_den;
        Some(cur)
    }
}

/// Rationals of `(0, 1)` in Calkin–Wilf order: `1/2, 1/3, 2/3, 1/4, 3/5, …`.
pub fn unit_rationals() -> impl Iterator<Item = (u64, u64)> {
    CalkinWilf::default().filter(|&(n, d)| n < d)
}

/// The first `count` rationals of the window's enumeration, pairwise distinct.
pub fn enumerate_rationals(window: Interval, count: usize) -> Result<Vec<Rational>> {
    if !window.is_finite() || window.lo >= window.hi {
        return Err(Error::InvalidParams(format!(
            "window ({}, {}) must be finite and nondegenerate",
            window.lo, window.hi
        )));
    }
    let lo = BigRational::from_f64(window.lo).expect("finite");
    let width = BigRational::from_f64(window.hi).expect("finite") - &lo;
    let unit_window = window.lo == 0.0 && window.hi == 1.0;
    Ok(unit_rationals()
        .take(count)
        .map(|(n, d)| {
            let t = BigRational::new(BigInt::from(n), BigInt::from(d));
            let exact = if unit_window { t } else { &lo + &width * t };
            let value = exact.to_f64().expect("bounded rational");
            Rational { exact, value }
        })
        .collect())
}
