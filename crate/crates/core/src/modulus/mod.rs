//! p-modulus of interval curves on the line for `μ = f_a·Lebesgue + atoms`.

mod measure;
mod solver;

pub use measure::{Atom, MeasureSpec, CONTINUITY_TOL};
pub use solver::{modulus_family_grid, ModulusResult, GAP_TOL, MAX_ITERATIONS, ZERO_MASS_CAP};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::power_arcs::{integrate_log_corrected, integrate_power, integrate_power_log, integrate_product, log_scale};
use crate::power_arcs::{Interval, PiecewisePowerFn};

/// A finite family of interval curves `γ_I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveFamily {
    intervals: Vec<Interval>,
}

impl CurveFamily {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if let Some(iv) = intervals.iter().find(|iv| iv.is_degenerate() || !iv.is_finite()) {
            return Err(Error::DegenerateInterval(iv.lo));
        }
        Ok(CurveFamily { intervals })
    }

    /// The intervals of `candidates` that meet `points` (closed intervals).
    pub fn meeting(candidates: &[Interval], points: &[f64]) -> Result<Self> {
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        let hit = |iv: &Interval| {
            let i = sorted.partition_point(|&q| q < iv.lo);
            i < sorted.len() && sorted[i] <= iv.hi
        };
        Self::new(candidates.iter().copied().filter(hit).collect())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Smallest interval containing every curve.
    pub fn hull(&self) -> Interval {
        self.intervals.iter().fold(Interval { lo: f64::INFINITY, hi: f64::NEG_INFINITY }, |h, iv| Interval {
            lo: h.lo.min(iv.lo),
            hi: h.hi.max(iv.hi),
        })
    }

    pub fn union(&self, other: &CurveFamily) -> CurveFamily {
        let mut intervals = self.intervals.clone();
        intervals.extend_from_slice(&other.intervals);
        CurveFamily { intervals }
    }
}

/// `Mod_{p,μ}({γ_I}) = (∫_I f_a^{1/(1−p)})^{1−p}`, zero when the integral
/// diverges. Atoms do not contribute.
pub fn modulus_single(mu: &MeasureSpec, iv: Interval, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if iv.is_degenerate() {
        return Err(Error::DegenerateInterval(iv.lo));
    }
    Ok(match integrate_power(mu.density(), 1.0 / (1.0 - p), iv) {
        ExtReal::Infinite => 0.0,
        ExtReal::Finite(t) => t.powf(1.0 - p),
    })
}

/// A candidate density `g` that is `p`-integrable yet has infinite length
/// along each curve, supported on `window`.
#[derive(Debug, Clone, PartialEq)]
pub enum NullWitness {
    /// `g = base^power`.
    Power { base: PiecewisePowerFn, power: f64 },
    /// `g = base^{−1/α} |ln(base/r̄)|^{−1}`, `r̄ = e^{α(α+1)}`, for `base <= 1`.
    LogCorrected { base: PiecewisePowerFn, alpha: f64 },
}

impl NullWitness {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NullWitness::Power { base, power } => base.eval(x).powf(*power),
            NullWitness::LogCorrected { base, alpha } => {
                let b = base.eval(x);
                b.powf(-1.0 / alpha) / (b / log_scale(*alpha)).ln().abs()
            }
        }
    }

    /// `∫_I g`.
    fn length(&self, iv: Interval) -> Result<ExtReal> {
        match self {
            NullWitness::Power { base, power } => Ok(integrate_power(base, *power, iv)),
            NullWitness::LogCorrected { base, alpha } => integrate_log_corrected(base, *alpha, 1.0, iv),
        }
    }

    /// `∫_window g^p f_a`.
    fn density_mass(&self, density: &PiecewisePowerFn, p: f64, window: Interval) -> Result<ExtReal> {
        match self {
            NullWitness::Power { base, power } => Ok(integrate_product(base, power * p, density, window)),
            NullWitness::LogCorrected { base, alpha } => {
                if density != base {
                    return Err(Error::Unsupported(
                        "log-corrected witness needs the measure density to equal its base".into(),
                    ));
                }
                // g^p·w = w^{1 − p/α} |ln(w/r̄)|^{−p}
                integrate_power_log(base, 1.0 - p / alpha, *alpha, p, window)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCertificate {
    /// `∫ g^p dμ` over the window, atoms included.
    pub mass: ExtReal,
    /// `∫_I g` per curve.
    pub lengths: Vec<ExtReal>,
    pub holds: bool,
}

/// Check that `g = witness·1_window` has finite `∫ g^p dμ` and infinite
/// length along every curve of `family`, which makes the family
/// `Mod_{p,μ}`-null.
pub fn verify_null_witness(
    mu: &MeasureSpec,
    witness: &NullWitness,
    window: Interval,
    family: &CurveFamily,
    p: f64,
) -> Result<NullCertificate> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let mut mass = witness.density_mass(mu.density(), p, window)?;
    for a in mu.atoms().iter().filter(|a| window.contains(a.at)) {
        let g = witness.eval(a.at);
        mass = mass + if g.is_finite() { ExtReal::finite(a.mass * g.powf(p)) } else { ExtReal::Infinite };
    }
    let lengths = family
        .intervals()
        .iter()
        .map(|iv| match iv.intersect(&window) {
            Some(part) => witness.length(part),
            None => Ok(ExtReal::ZERO),
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = mass.is_finite() && lengths.iter().all(ExtReal::is_infinite);
    Ok(NullCertificate { mass, lengths, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_arcs::PowerArc;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn power_density(alpha: f64) -> MeasureSpec {
        MeasureSpec::absolutely_continuous(PiecewisePowerFn::from_arc(PowerArc::new(0.0, 1.0, alpha).unwrap()))
    }

    #[test]
    fn single_curve_examples() {
        let leb = MeasureSpec::lebesgue();
        assert_eq!(modulus_single(&leb, iv(0.0, 1.0), 2.0).unwrap(), 1.0);
        for p in [1.5, 2.0, 3.0] {
            let v = modulus_single(&leb, iv(0.0, 2.5), p).unwrap();
            assert!((v - 2.5f64.powf(1.0 - p)).abs() < 1e-14);
        }
        let v = modulus_single(&power_density(0.5), iv(-1.0, 1.0), 2.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        for p in [1.2, 1.5, 2.0] {
            assert_eq!(modulus_single(&power_density(1.0), iv(-1.0, 1.0), p).unwrap(), 0.0);
        }
        assert!(modulus_single(&power_density(1.0), iv(-1.0, 1.0), 2.01).unwrap() > 0.0);
        assert_eq!(modulus_single(&leb, iv(0.0, 1.0), 1.0), Err(Error::InvalidExponent(1.0)));
        assert_eq!(modulus_single(&leb, Interval { lo: 0.5, hi: 0.5 }, 2.0), Err(Error::DegenerateInterval(0.5)));
    }

    #[test]
    fn constant_witness_is_not_null() {
        let g = NullWitness::Power { base: PiecewisePowerFn::constant(1.0).unwrap(), power: 1.0 };
        let fam = CurveFamily::new(vec![iv(0.0, 1.0)]).unwrap();
        let c = verify_null_witness(&MeasureSpec::lebesgue(), &g, iv(0.0, 1.0), &fam, 2.0).unwrap();
        assert!(!c.holds);
        assert_eq!(c.mass, ExtReal::finite(1.0));
        assert_eq!(c.lengths, vec![ExtReal::finite(1.0)]);
    }

    #[test]
    fn power_witness_for_abs_x() {
        // μ = |x|, g = |x|^{-1}: ∫ g^p |x| finite iff p < 2, curves through 0 infinite
        let mu = power_density(1.0);
        let g = NullWitness::Power { base: mu.density().clone(), power: -1.0 };
        let fam = CurveFamily::new(vec![iv(-0.5, 0.5), iv(0.0, 0.25)]).unwrap();
        let ok = verify_null_witness(&mu, &g, iv(-1.0, 1.0), &fam, 1.5).unwrap();
        assert!(ok.holds, "{ok:?}");
        let bad = verify_null_witness(&mu, &g, iv(-1.0, 1.0), &fam, 2.0).unwrap();
        assert!(!bad.holds);
        // an atom where g blows up spoils the mass side
        let with_atom = mu.with_atoms(vec![Atom { at: 0.0, mass: 1.0 }]).unwrap();
        assert!(!verify_null_witness(&with_atom, &g, iv(-1.0, 1.0), &fam, 1.5).unwrap().holds);
    }

    #[test]
    fn log_witness_needs_matching_density() {
        let base = PiecewisePowerFn::constant(1.0)
            .unwrap()
            .min_with(&PowerArc::new(0.0, 1.0, 1.0).unwrap(), iv(-1.0, 1.0))
            .unwrap();
        let g = NullWitness::LogCorrected { base: base.clone(), alpha: 1.0 };
        let fam = CurveFamily::new(vec![iv(-0.5, 0.5)]).unwrap();
        let mu = MeasureSpec::absolutely_continuous(base);
        let c = verify_null_witness(&mu, &g, iv(-1.0, 1.0), &fam, 2.0).unwrap();
        assert!(c.holds, "{c:?}");
        let err = verify_null_witness(&MeasureSpec::lebesgue(), &g, iv(-1.0, 1.0), &fam, 2.0);
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn meeting_filter() {
        let ivs = [iv(0.0, 0.25), iv(0.25, 0.5), iv(0.5, 1.0)];
        let fam = CurveFamily::meeting(&ivs, &[0.3, 0.75]).unwrap();
        assert_eq!(fam.intervals(), &[iv(0.25, 0.5), iv(0.5, 1.0)]);
    }
}
