use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power_arcs::{Interval, PiecewisePowerFn, PowerArc};

/// Relative tolerance for the continuity check on load.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
}

/// `μ = f_a·Lebesgue + Σ mass·δ_at`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    density: PiecewisePowerFn,
    atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SegmentJson {
    from: f64,
    to: f64,
    center: f64,
    coeff: f64,
    exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureJson {
    density: Vec<SegmentJson>,
    #[serde(default)]
    atoms: Vec<Atom>,
}

impl MeasureSpec {
    pub fn new(density: PiecewisePowerFn, mut atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !a.at.is_finite() || !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidParams(format!("atom at {} with mass {} is invalid", a.at, a.mass)));
            }
        }
        atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
        if atoms.windows(2).any(|w| w[0].at == w[1].at) {
            return Err(Error::InvalidParams("atom locations must be distinct".into()));
        }
        Ok(MeasureSpec { density, atoms })
    }

    pub fn lebesgue() -> Self {
        Self::absolutely_continuous(PiecewisePowerFn::constant(1.0).expect("positive"))
    }

    pub fn absolutely_continuous(density: PiecewisePowerFn) -> Self {
        MeasureSpec { density, atoms: Vec::new() }
    }

    pub fn density(&self) -> &PiecewisePowerFn {
        &self.density
    }

    /// Atoms sorted by location.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_atom(&self, x: f64) -> bool {
        self.atoms.binary_search_by(|a| a.at.total_cmp(&x)).is_ok()
    }

    pub fn with_atoms(&self, atoms: Vec<Atom>) -> Result<Self> {
        Self::new(self.density.clone(), atoms)
    }

    /// `t·μ`.
    pub fn scaled(&self, t: f64) -> Self {
        MeasureSpec {
            density: self.density.scaled(t),
            atoms: self.atoms.iter().map(|a| Atom { mass: a.mass * t, ..*a }).collect(),
        }
    }

    /// Parse the JSON schema. Segments must tile `[from_0, to_last]`; the
    /// outermost arcs are extended to the whole line. Neighbouring nonzero
    /// segments must agree at their common end.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if raw.density.is_empty() {
            return Err(Error::Schema("density needs at least one segment".into()));
        }
        let mut arcs = Vec::with_capacity(raw.density.len());
        for (i, s) in raw.density.iter().enumerate() {
            if !(s.from < s.to) {
                return Err(Error::Schema(format!("segment {i}: from {} must be below to {}", s.from, s.to)));
            }
            if i > 0 && raw.density[i - 1].to != s.from {
                return Err(Error::Schema(format!("segment {i} does not start where segment {} ends", i - 1)));
            }
            let arc = if s.coeff == 0.0 {
                PowerArc::zero()
            } else {
                PowerArc::new(s.center, s.coeff, s.exponent).map_err(|e| Error::Schema(format!("segment {i}: {e}")))?
            };
            arcs.push(arc);
        }
        for i in 1..arcs.len() {
            let (l, r) = (arcs[i - 1], arcs[i]);
            if l.is_zero() || r.is_zero() {
                continue;
            }
            let x = raw.density[i].from;
            let (a, b) = (l.eval(x), r.eval(x));
            if (a - b).abs() > CONTINUITY_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::Schema(format!("density jumps from {a} to {b} at {x}")));
            }
        }
        let interior: Vec<f64> = raw.density[1..].iter().map(|s| s.from).collect();
        let density = PiecewisePowerFn::from_parts(interior, arcs).map_err(|e| Error::Schema(e.to_string()))?;
        Self::new(density, raw.atoms).map_err(|e| Error::Schema(e.to_string()))
    }

    /// Serialize with the outer segments clipped to `window`, which must
    /// contain every interior breakpoint.
    pub fn to_json(&self, window: Interval) -> Result<String> {
        let bps = self.density.breakpoints();
        if bps.first().is_some_and(|&b| b <= window.lo) || bps.last().is_some_and(|&b| b >= window.hi) {
            return Err(Error::InvalidParams("window must strictly contain every breakpoint".into()));
        }
        let density = self
            .density
            .segments()
            .iter()
            .enumerate()
            .map(|(i, arc)| {
                let (lo, hi) = self.density.segment_bounds(i);
                SegmentJson {
                    from: lo.max(window.lo),
                    to: hi.min(window.hi),
                    center: arc.center,
                    coeff: arc.coeff,
                    exponent: arc.exponent,
                }
            })
            .collect();
        let raw = MeasureJson { density, atoms: self.atoms.clone() };
        Ok(serde_json::to_string_pretty(&raw).expect("plain data"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_power_with_atom() {
        let text = r#"{"density":[{"from":-1,"to":1,"center":0,"coeff":1,"exponent":0.5}],
                       "atoms":[{"at":2,"mass":3}]}"#;
        let mu = MeasureSpec::from_json(text).unwrap();
        assert_eq!(mu.density().eval(-4.0), 2.0);
        assert!(mu.is_atom(2.0) && !mu.is_atom(1.0));
    }

    #[test]
    fn zero_segment_may_jump() {
        let text = r#"{"density":[
            {"from":-1,"to":0,"center":0,"coeff":1,"exponent":0},
            {"from":0,"to":1,"center":0,"coeff":0,"exponent":0},
            {"from":1,"to":2,"center":0,"coeff":1,"exponent":0}]}"#;
        let mu = MeasureSpec::from_json(text).unwrap();
        assert_eq!(mu.density().zero_segments(), vec![Interval { lo: 0.0, hi: 1.0 }]);
    }

    #[test]
    fn rejects_bad_input() {
        let jump = r#"{"density":[
            {"from":0,"to":1,"center":0,"coeff":1,"exponent":0},
            {"from":1,"to":2,"center":0,"coeff":2,"exponent":0}]}"#;
        assert!(matches!(MeasureSpec::from_json(jump), Err(Error::Schema(_))));
        let gap = r#"{"density":[
            {"from":0,"to":1,"center":0,"coeff":1,"exponent":0},
            {"from":1.5,"to":2,"center":0,"coeff":1,"exponent":0}]}"#;
        assert!(MeasureSpec::from_json(gap).is_err());
        let twin = r#"{"density":[{"from":0,"to":1,"center":0,"coeff":1,"exponent":0}],
                       "atoms":[{"at":0.5,"mass":1},{"at":0.5,"mass":2}]}"#;
        assert!(MeasureSpec::from_json(twin).is_err());
        assert!(MeasureSpec::from_json(r#"{"density":[]}"#).is_err());
        assert!(MeasureSpec::from_json("not json").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = PiecewisePowerFn::constant(1.0)
            .unwrap()
            .min_with(&PowerArc::new(0.3, 4.0, 1.0).unwrap(), Interval::around(0.3, 0.25))
            .unwrap();
        let mu = MeasureSpec::new(f, vec![Atom { at: 0.9, mass: 0.5 }]).unwrap();
        let text = mu.to_json(Interval { lo: 0.0, hi: 1.0 }).unwrap();
        assert_eq!(MeasureSpec::from_json(&text).unwrap(), mu);
    }
}
