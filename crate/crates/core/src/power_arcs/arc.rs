use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidParams(format!("interval [{lo}, {hi}] has lo > hi")));
        }
        Ok(Interval { lo, hi })
    }

    /// Interval `[center - half, center + half]`.
    pub fn around(center: f64, half: f64) -> Self {
        Interval { lo: center - half, hi: center + half }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Same center, twice the length.
    pub fn doubled(&self) -> Interval {
        let h = self.len();
        Interval { lo: self.lo - 0.5 * h, hi: self.hi + 0.5 * h }
    }
}

/// `x ↦ coeff · |x − center|^exponent`; exponent 0 is the constant `coeff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerArc {
    pub center: f64,
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerArc {
    pub fn new(center: f64, coeff: f64, exponent: f64) -> Result<Self> {
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(Error::InvalidParams(format!("arc coefficient must be positive, got {coeff}")));
        }
        if !(exponent >= 0.0) || !exponent.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParams(format!(
                "arc needs finite center and exponent >= 0, got center {center}, exponent {exponent}"
            )));
        }
        Ok(PowerArc { center, coeff, exponent })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(0.0, c, 0.0)
    }

    /// The identically-zero segment used for zero-density parts of a measure.
    pub fn zero() -> Self {
        PowerArc { center: 0.0, coeff: 0.0, exponent: 0.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.exponent == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coeff
        } else {
            let d = (x - self.center).abs();
            if d == 0.0 {
                0.0
            } else {
                self.coeff * d.powf(self.exponent)
            }
        }
    }

    /// Multiply the arc by `t > 0`.
    pub fn scaled(&self, t: f64) -> Self {
        PowerArc { coeff: self.coeff * t, ..*self }
    }
}

/// Solution set of `arc1(x) = arc2(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Crossings {
    Points(Vec<f64>),
    Everywhere,
}

impl Crossings {
    pub fn points(&self) -> &[f64] {
        match self {
            Crossings::Points(p) => p,
            Crossings::Everywhere => &[],
        }
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Crossings {
    v.retain(|x| x.is_finite());
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    Crossings::Points(v)
}

/// Closed-form crossings of two arcs.
///
/// Supported pairs: equal positive exponents, or at least one constant.
pub fn crossings(a1: &PowerArc, a2: &PowerArc) -> Result<Crossings> {
    match (a1.is_constant(), a2.is_constant()) {
        (true, true) => Ok(if a1.coeff == a2.coeff { Crossings::Everywhere } else { Crossings::Points(vec![]) }),
        (false, true) => Ok(arc_vs_constant(a1, a2.coeff)),
        (true, false) => Ok(arc_vs_constant(a2, a1.coeff)),
        (false, false) if a1.exponent == a2.exponent => Ok(equal_exponents(a1, a2)),
        (false, false) => Err(Error::UnsupportedExponentPair(a1.exponent, a2.exponent)),
    }
}

fn arc_vs_constant(arc: &PowerArc, t: f64) -> Crossings {
    if t < 0.0 {
        return Crossings::Points(vec![]);
    }
    let d = (t / arc.coeff).powf(1.0 / arc.exponent);
    sorted_unique(vec![arc.center - d, arc.center + d])
}

fn equal_exponents(a1: &PowerArc, a2: &PowerArc) -> Crossings {
    // |x - a1| = lambda |x - a2|
    let lambda = (a2.coeff / a1.coeff).powf(1.0 / a1.exponent);
    if a1.center == a2.center {
        return if a1.coeff == a2.coeff { Crossings::Everywhere } else { Crossings::Points(vec![a1.center]) };
    }
    let (c1, c2) = (a1.center, a2.center);
    let mut roots = Vec::with_capacity(2);
    // x - c1 = -lambda (x - c2)
    roots.push((c1 + lambda * c2) / (1.0 + lambda));
    // x - c1 = lambda (x - c2)
    if lambda != 1.0 {
        roots.push((c1 - lambda * c2) / (1.0 - lambda));
    }
    sorted_unique(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(a: f64, c: f64, e: f64) -> PowerArc {
        PowerArc::new(a, c, e).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(arc(0.0, 1.0, 0.0).eval(7.0), 1.0);
        assert_eq!(arc(0.0, 2.0, 1.0).eval(-3.0), 6.0);
        assert_eq!(arc(1.0, 1.0, 0.5).eval(5.0), 2.0);
        assert_eq!(arc(1.0, 3.0, 0.5).eval(1.0), 0.0);
    }

    #[test]
    fn crossing_examples() {
        let c = crossings(&arc(0.0, 1.0, 1.0), &arc(1.0, 2.0, 1.0)).unwrap();
        let p = c.points();
        assert_eq!(p.len(), 2);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 2.0).abs() < 1e-15);

        let c = crossings(&arc(0.0, 1.0, 1.0), &arc(5.0, 4.0, 0.0)).unwrap();
        assert_eq!(c.points(), &[-4.0, 4.0]);

        assert_eq!(crossings(&arc(0.0, 1.0, 2.0), &arc(1.0, 1.0, 1.0)), Err(Error::UnsupportedExponentPair(2.0, 1.0)));
    }

    #[test]
    fn identical_arcs_cross_everywhere() {
        let a = arc(0.3, 2.0, 1.5);
        assert_eq!(crossings(&a, &a).unwrap(), Crossings::Everywhere);
        let k = arc(0.0, 2.0, 0.0);
        assert_eq!(crossings(&k, &k).unwrap(), Crossings::Everywhere);
    }

    #[test]
    fn same_center_different_scale_meets_only_at_center() {
        let c = crossings(&arc(0.5, 1.0, 2.0), &arc(0.5, 3.0, 2.0)).unwrap();
        assert_eq!(c.points(), &[0.5]);
    }

    #[test]
    fn rejects_bad_arcs() {
        assert!(PowerArc::new(0.0, 0.0, 1.0).is_err());
        assert!(PowerArc::new(0.0, 1.0, -1.0).is_err());
    }
}
