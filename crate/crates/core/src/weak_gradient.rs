//! The set `𝒩_p` of points where `f_a^{1/(1−p)}` is locally integrable, and
//! the p-weak gradient `|df|_{p,μ}` of piecewise-linear Lipschitz functions.
//!
//! Membership is decided from the density's structure: a point leaves `𝒩_p`
//! when it is the zero of an arc `c|x − x0|^e` with `p <= 1 + e`, or when it
//! lies in the closure of a segment where the density vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::modulus::MeasureSpec;
use crate::power_arcs::Interval;

/// Continuous piecewise-linear `f: ℝ → ℝ`: `slopes[i]` applies left of
/// `breakpoints[i]` and `slopes[last]` right of the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzSpec {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    /// `f(breakpoints[0])`, or `f(0)` without breakpoints.
    pub value_at_left: f64,
}

impl LipschitzSpec {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, value_at_left: f64) -> Result<Self> {
        let spec = LipschitzSpec { breakpoints, slopes, value_at_left };
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear(slope: f64) -> Self {
        LipschitzSpec { breakpoints: vec![], slopes: vec![slope], value_at_left: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slopes.len() != self.breakpoints.len() + 1 {
            return Err(Error::Schema(format!(
                "{} breakpoints need {} slopes, got {}",
                self.breakpoints.len(),
                self.breakpoints.len() + 1,
                self.slopes.len()
            )));
        }
        if self.breakpoints.iter().chain(&self.slopes).any(|x| !x.is_finite()) || !self.value_at_left.is_finite() {
            return Err(Error::Schema("breakpoints, slopes and value must be finite".into()));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schema("breakpoints must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: LipschitzSpec = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.slopes.iter().fold(0.0, |a, s| a.max(s.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let Some(&b0) = self.breakpoints.first() else {
            return self.value_at_left + self.slopes[0] * x;
        };
        if x <= b0 {
            return self.value_at_left + self.slopes[0] * (x - b0);
        }
        let mut v = self.value_at_left;
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            if x <= w[1] {
                return v + self.slopes[i + 1] * (x - w[0]);
            }
            v += self.slopes[i + 1] * (w[1] - w[0]);
        }
        let last = *self.breakpoints.last().unwrap();
        v + self.slopes[self.slopes.len() - 1] * (x - last)
    }

    /// `f'(x)`, or `None` at a breakpoint with unequal one-sided slopes.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        let i = self.breakpoints.partition_point(|&b| b < x);
        if i < self.breakpoints.len() && self.breakpoints[i] == x {
            let (l, r) = (self.slopes[i], self.slopes[i + 1]);
            return (l == r).then_some(l);
        }
        Some(self.slopes[i])
    }
}

/// Why a point is or is not in `𝒩_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The density vanishes at the point like `|x − x0|^exponent`; the point
    /// is in `𝒩_p` iff `p > threshold = 1 + exponent`.
    ExponentTest { exponent: f64, threshold: f64 },
    /// The point touches a segment where the density is identically zero.
    ZeroSegment { segment: Interval },
    /// The density is positive at the point, hence bounded below nearby.
    PositiveDensity { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointClass {
    pub in_np: bool,
    pub witness: Witness,
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Indices of the density segments whose closure contains `x`.
fn touching(mu: &MeasureSpec, x: f64) -> Vec<usize> {
    let f = mu.density();
    let i = f.segment_index(x);
    let mut out = vec![i];
    if f.segment_bounds(i).1 == x && i + 1 < f.len() {
        out.push(i + 1);
    }
    out
}

pub fn classify_point(mu: &MeasureSpec, p: f64, x: f64) -> Result<PointClass> {
    check_p(p)?;
    let f = mu.density();
    let segs = touching(mu, x);
    if let Some(&i) = segs.iter().find(|&&i| f.segments()[i].is_zero()) {
        let (lo, hi) = f.segment_bounds(i);
        return Ok(PointClass { in_np: false, witness: Witness::ZeroSegment { segment: Interval { lo, hi } } });
    }
    // the worst vanishing order among arcs centered at x
    let order = segs
        .iter()
        .map(|&i| f.segments()[i])
        .filter(|a| !a.is_constant() && a.center == x)
        .map(|a| a.exponent)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |m| m.max(e))));
    Ok(match order {
        Some(e) => {
            PointClass { in_np: p > 1.0 + e, witness: Witness::ExponentTest { exponent: e, threshold: 1.0 + e } }
        }
        None => {
            let value = segs.iter().map(|&i| f.segments()[i].eval(x)).fold(f64::INFINITY, f64::min);
            PointClass { in_np: true, witness: Witness::PositiveDensity { value } }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcludedPoint {
    pub location: f64,
    pub exponent: f64,
    pub threshold: f64,
}

/// `𝒩_p^c ∩ I`: isolated zeros failing the exponent test, and the closed
/// zero-density segments meeting `I` (clipped to `I`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NpReport {
    pub interval: Interval,
    pub p: f64,
    pub points: Vec<ExcludedPoint>,
    pub subintervals: Vec<Interval>,
}

impl NpReport {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.subintervals.is_empty()
    }
}

pub fn np_complement(mu: &MeasureSpec, p: f64, iv: Interval) -> Result<NpReport> {
    check_p(p)?;
    let f = mu.density();
    let mut points: Vec<ExcludedPoint> = Vec::new();
    let mut subintervals = Vec::new();
    for (i, arc) in f.segments().iter().enumerate() {
        let (lo, hi) = f.segment_bounds(i);
        if arc.is_zero() {
            if lo <= iv.hi && hi >= iv.lo {
                subintervals.push(Interval { lo: lo.max(iv.lo), hi: hi.min(iv.hi) });
            }
            continue;
        }
        let c = arc.center;
        if arc.is_constant() || c < lo || c > hi || !iv.contains(c) || p > 1.0 + arc.exponent {
            continue;
        }
        match points.last_mut() {
            Some(last) if last.location == c => {
                if arc.exponent > last.exponent {
                    *last = ExcludedPoint { location: c, exponent: arc.exponent, threshold: 1.0 + arc.exponent };
                }
            }
            _ => points.push(ExcludedPoint { location: c, exponent: arc.exponent, threshold: 1.0 + arc.exponent }),
        }
    }
    // points inside a reported zero segment are already covered
    points.retain(|pt| !subintervals.iter().any(|s: &Interval| s.contains(pt.location)));
    Ok(NpReport { interval: iv, p, points, subintervals })
}

/// `|df|_{p,μ}(x)`: `|f'(x)|` on `𝒩_p` off the atoms, `0` elsewhere.
pub fn weak_gradient_at(mu: &MeasureSpec, p: f64, f: &LipschitzSpec, x: f64) -> Result<f64> {
    let class = classify_point(mu, p, x)?;
    if !class.in_np || mu.is_atom(x) {
        return Ok(0.0);
    }
    f.derivative(x).map(f64::abs).ok_or(Error::NotDifferentiable(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientRow {
    pub x: f64,
    pub in_np: bool,
    pub is_atom: bool,
    pub grad: f64,
}

/// `weak_gradient_at` on `samples` equispaced points of `I` together with
/// every density zero, atom and breakpoint of `f` lying in `I`; points where
/// the gradient is undefined are skipped.
pub fn weak_gradient_report(
    mu: &MeasureSpec,
    p: f64,
    f: &LipschitzSpec,
    iv: Interval,
    samples: usize,
) -> Result<Vec<GradientRow>> {
    check_p(p)?;
    let mut xs: Vec<f64> = match samples {
        0 => vec![],
        1 => vec![iv.center()],
        n => (0..n).map(|i| if i == n - 1 { iv.hi } else { iv.lo + iv.len() * i as f64 / (n - 1) as f64 }).collect(),
    };
    xs.extend(mu.density().zero_set());
    xs.extend(mu.atoms().iter().map(|a| a.at));
    xs.extend(&f.breakpoints);
    xs.retain(|&x| iv.contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        match weak_gradient_at(mu, p, f, x) {
            Ok(grad) => {
                rows.push(GradientRow { x, in_np: classify_point(mu, p, x)?.in_np, is_atom: mu.is_atom(x), grad })
            }
            Err(Error::NotDifferentiable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

/// CSV with header `x,in_Np,is_atom,grad`.
pub fn gradient_csv(rows: &[GradientRow]) -> String {
    let mut s = String::from("x,in_Np,is_atom,grad\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", fmt17(r.x), r.in_np, r.is_atom, fmt17(r.grad)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::Atom;
    use crate::power_arcs::{PiecewisePowerFn, PowerArc};

    fn sqrt_with_atom() -> MeasureSpec {
        let f = PiecewisePowerFn::from_arc(PowerArc::new(0.0, 1.0, 0.5).unwrap());
        MeasureSpec::new(f, vec![Atom { at: 2.0, mass: 1.0 }]).unwrap()
    }

    #[test]
    fn lipschitz_eval() {
        let f = LipschitzSpec::new(vec![0.0, 1.0], vec![-1.0, 2.0, 0.0], 5.0).unwrap();
        assert_eq!(f.eval(-2.0), 7.0);
        assert_eq!(f.eval(0.5), 6.0);
        assert_eq!(f.eval(3.0), 7.0);
        assert_eq!(f.derivative(0.0), None);
        assert_eq!(f.derivative(0.5), Some(2.0));
        assert_eq!(f.lipschitz_constant(), 2.0);
        assert!(LipschitzSpec::new(vec![0.0], vec![1.0], 0.0).is_err());
        assert!(LipschitzSpec::from_json(r#"{"breakpoints":[],"slopes":[3],"value_at_left":0}"#).is_ok());
    }

    #[test]
    fn lebesgue_everything_in() {
        let mu = MeasureSpec::lebesgue();
        for x in [-3.0, 0.0, 1e6] {
            assert!(classify_point(&mu, 1.01, x).unwrap().in_np);
            assert_eq!(weak_gradient_at(&mu, 1.01, &LipschitzSpec::linear(1.0), x).unwrap(), 1.0);
        }
        assert_eq!(classify_point(&mu, 1.0, 0.0), Err(Error::InvalidExponent(1.0)));
    }

    #[test]
    fn power_threshold() {
        let mu = MeasureSpec::absolutely_continuous(PiecewisePowerFn::from_arc(PowerArc::new(0.0, 1.0, 1.0).unwrap()));
        assert!(!classify_point(&mu, 2.0, 0.0).unwrap().in_np);
        assert!(classify_point(&mu, 2.0001, 0.0).unwrap().in_np);
        for p in [1.1, 2.0, 5.0] {
            assert!(classify_point(&mu, p, 0.5).unwrap().in_np);
        }
    }

    #[test]
    fn gradient_examples() {
        let mu = sqrt_with_atom();
        let f = LipschitzSpec::linear(3.0);
        assert_eq!(weak_gradient_at(&mu, 2.0, &f, 0.0).unwrap(), 3.0);
        assert_eq!(weak_gradient_at(&mu, 2.0, &f, 2.0).unwrap(), 0.0);
        assert_eq!(weak_gradient_at(&mu, 2.0, &f, 1.0).unwrap(), 3.0);
        assert_eq!(weak_gradient_at(&mu, 1.3, &f, 0.0).unwrap(), 0.0);
        let kinked = LipschitzSpec::new(vec![1.0], vec![1.0, 2.0], 0.0).unwrap();
        assert_eq!(weak_gradient_at(&mu, 2.0, &kinked, 1.0), Err(Error::NotDifferentiable(1.0)));
        // outside 𝒩_p the kink does not matter
        let kinked0 = LipschitzSpec::new(vec![0.0], vec![1.0, 2.0], 0.0).unwrap();
        assert_eq!(weak_gradient_at(&mu, 1.3, &kinked0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn report_three_rows() {
        let rows =
            weak_gradient_report(&sqrt_with_atom(), 2.0, &LipschitzSpec::linear(3.0), Interval { lo: 0.0, hi: 2.0 }, 3)
                .unwrap();
        let got: Vec<(f64, bool, bool, f64)> = rows.iter().map(|r| (r.x, r.in_np, r.is_atom, r.grad)).collect();
        assert_eq!(got, vec![(0.0, true, false, 3.0), (1.0, true, false, 3.0), (2.0, true, true, 0.0)]);
        assert!(gradient_csv(&rows).starts_with("x,in_Np,is_atom,grad\n0.0000000000000000e0,true,false,3.0"));
    }

    #[test]
    fn zero_segment_complement() {
        let f = PiecewisePowerFn::from_parts(
            vec![0.0, 1.0],
            vec![PowerArc::constant(1.0).unwrap(), PowerArc::zero(), PowerArc::constant(1.0).unwrap()],
        )
        .unwrap();
        let mu = MeasureSpec::absolutely_continuous(f);
        for p in [1.1, 3.0] {
            let rep = np_complement(&mu, p, Interval { lo: -2.0, hi: 2.0 }).unwrap();
            assert_eq!(rep.subintervals, vec![Interval { lo: 0.0, hi: 1.0 }]);
            assert!(rep.points.is_empty());
        }
        assert!(!classify_point(&mu, 2.0, 0.0).unwrap().in_np);
        assert!(!classify_point(&mu, 2.0, 1.0).unwrap().in_np);
        assert!(classify_point(&mu, 2.0, 1.0 + 1e-9).unwrap().in_np);
    }

    #[test]
    fn np_grows_with_p() {
        let mu = MeasureSpec::absolutely_continuous(
            PiecewisePowerFn::from_parts(
                vec![0.5],
                vec![PowerArc::new(0.0, 1.0, 0.5).unwrap(), PowerArc::new(1.0, 0.5f64.sqrt() / 0.25, 2.0).unwrap()],
            )
            .unwrap(),
        );
        let iv = Interval { lo: -1.0, hi: 2.0 };
        let count = |p| np_complement(&mu, p, iv).unwrap().points.len();
        assert_eq!(count(1.2), 2);
        assert_eq!(count(2.0), 1);
        assert_eq!(count(3.5), 0);
    }
}
