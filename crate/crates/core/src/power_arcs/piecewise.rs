use crate::error::{Error, Result};

use super::arc::{crossings, Crossings, Interval, PowerArc};

/// Breakpoints closer than this (relative to `max(1, |x|)`) are merged.
pub const BREAKPOINT_TOL: f64 = 1e-14;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= BREAKPOINT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// A function on ℝ made of power arcs on consecutive segments.
///
/// Segment `i` covers `(bp[i], bp[i+1]]`, with `bp[0] = -inf` and
/// `bp[last] = +inf`, so the value at an interior breakpoint is read from the
/// segment on its left.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePowerFn {
    breakpoints: Vec<f64>,
    segments: Vec<PowerArc>,
}

impl PiecewisePowerFn {
    pub fn constant(c: f64) -> Result<Self> {
        Ok(Self::from_arc(PowerArc::constant(c)?))
    }

    pub fn from_arc(arc: PowerArc) -> Self {
        PiecewisePowerFn { breakpoints: vec![f64::NEG_INFINITY, f64::INFINITY], segments: vec![arc] }
    }

    /// Build from interior breakpoints (strictly increasing, finite) and one
    /// arc per gap, `segments.len() == interior.len() + 1`.
    pub fn from_parts(interior: Vec<f64>, segments: Vec<PowerArc>) -> Result<Self> {
        if segments.len() != interior.len() + 1 {
            return Err(Error::InvalidParams(format!(
                "{} breakpoints need {} segments, got {}",
                interior.len(),
                interior.len() + 1,
                segments.len()
            )));
        }
        if interior.iter().any(|x| !x.is_finite()) || interior.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("breakpoints must be finite and strictly increasing".into()));
        }
        if segments.iter().any(|s| !(s.coeff >= 0.0) || !(s.exponent >= 0.0)) {
            return Err(Error::InvalidParams("segments must be nonnegative arcs".into()));
        }
        let mut breakpoints = Vec::with_capacity(interior.len() + 2);
        breakpoints.push(f64::NEG_INFINITY);
        breakpoints.extend(interior);
        breakpoints.push(f64::INFINITY);
        Ok(PiecewisePowerFn { breakpoints, segments })
    }

    /// Assemble from `(right_end, arc)` pieces in increasing order, the last
    /// right end being `+inf`. Merges equal neighbours and drops pieces
    /// shorter than the breakpoint tolerance.
    fn from_pieces(pieces: Vec<(f64, PowerArc)>) -> Self {
        let mut breakpoints = vec![f64::NEG_INFINITY];
        let mut segments: Vec<PowerArc> = Vec::with_capacity(pieces.len());
        for (end, arc) in pieces {
            let start = *breakpoints.last().unwrap();
            if start.is_finite() && end.is_finite() && (end <= start || close(start, end)) {
                continue;
            }
            if let Some(last) = segments.last() {
                if *last == arc {
                    *breakpoints.last_mut().unwrap() = end;
                    continue;
                }
            }
            segments.push(arc);
            breakpoints.push(end);
        }
        PiecewisePowerFn { breakpoints, segments }
    }

    /// Interior (finite) breakpoints.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    pub fn segments(&self) -> &[PowerArc] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// `(lo, hi)` of segment `i`, with infinite ends for the outer segments.
    pub fn segment_bounds(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    /// Index `i` with `bp[i] < x <= bp[i+1]`.
    pub fn segment_index(&self, x: f64) -> usize {
        let j = self.breakpoints.partition_point(|&b| b < x);
        j.saturating_sub(1).min(self.segments.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.segments[self.segment_index(x)].eval(x)
    }

    /// Nonempty overlaps of segments with `iv`, as `(index, piece)`.
    ///
    /// A degenerate `iv` yields the single segment owning the point.
    pub fn pieces(&self, iv: Interval) -> Vec<(usize, Interval)> {
        if iv.is_degenerate() {
            return vec![(self.segment_index(iv.lo), iv)];
        }
        let first = self.breakpoints.partition_point(|&b| b <= iv.lo).saturating_sub(1);
        let mut out = Vec::new();
        for i in first..self.segments.len() {
            let (lo, hi) = self.segment_bounds(i);
            if lo >= iv.hi {
                break;
            }
            let piece = Interval { lo: lo.max(iv.lo), hi: hi.min(iv.hi) };
            if piece.lo < piece.hi {
                out.push((i, piece));
            }
        }
        out
    }

    /// Exact `(min, max)` over the closed interval `iv`.
    ///
    /// Each arc is monotone on either side of its center, so only piece
    /// endpoints and in-piece centers are candidates.
    pub fn extrema(&self, iv: Interval) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, piece) in self.pieces(iv) {
            let arc = &self.segments[i];
            let mut consider = |x: f64| {
                let v = arc.eval(x);
                lo = lo.min(v);
                hi = hi.max(v);
            };
            consider(piece.lo);
            consider(piece.hi);
            if !arc.is_constant() && piece.contains(arc.center) {
                consider(arc.center);
            }
        }
        (lo, hi)
    }

    /// Pointwise `min(self, arc)` on `support`, `self` elsewhere.
    pub fn min_with(&self, arc: &PowerArc, support: Interval) -> Result<Self> {
        if !support.is_finite() {
            return Err(Error::PreconditionViolated("pw_min support must be finite".into()));
        }
        if support.is_degenerate() {
            return Ok(self.clone());
        }
        let mut pieces: Vec<(f64, PowerArc)> = Vec::with_capacity(self.segments.len() + 6);
        for (i, seg) in self.segments.iter().enumerate() {
            let (lo, hi) = self.segment_bounds(i);
            // left of support
            if lo < support.lo {
                pieces.push((hi.min(support.lo), *seg));
            }
            let u = lo.max(support.lo);
            let v = hi.min(support.hi);
            if u < v {
                let mut cuts: Vec<f64> = match crossings(seg, arc)? {
                    Crossings::Everywhere => vec![],
                    Crossings::Points(p) => {
                        p.into_iter().filter(|&x| x > u && x < v && !close(x, u) && !close(x, v)).collect()
                    }
                };
                cuts.push(v);
                let mut start = u;
                for end in cuts {
                    let mid = 0.5 * (start + end);
                    let pick = if arc.eval(mid) < seg.eval(mid) { *arc } else { *seg };
                    pieces.push((end, pick));
                    start = end;
                }
            }
            // right of support
            if hi > support.hi {
                pieces.push((hi, *seg));
            }
        }
        Ok(Self::from_pieces(pieces))
    }

    /// Points where the function vanishes: centers of positive-exponent arcs
    /// lying in the closure of their own segment.
    pub fn zero_set(&self) -> Vec<f64> {
        let mut zs: Vec<f64> = Vec::new();
        for (i, arc) in self.segments.iter().enumerate() {
            if arc.is_constant() {
                continue;
            }
            let (lo, hi) = self.segment_bounds(i);
            if lo <= arc.center && arc.center <= hi && zs.last() != Some(&arc.center) {
                zs.push(arc.center);
            }
        }
        zs
    }

    /// Segments that are identically zero, as closed intervals.
    pub fn zero_segments(&self) -> Vec<Interval> {
        self.segments
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_zero())
            .map(|(i, _)| {
                let (lo, hi) = self.segment_bounds(i);
                Interval { lo, hi }
            })
            .collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        PiecewisePowerFn {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(|s| s.scaled(t)).collect(),
        }
    }

    /// Largest relative jump between neighbouring arcs at interior breakpoints.
    pub fn max_jump(&self) -> f64 {
        (1..self.segments.len())
            .map(|i| {
                let x = self.breakpoints[i];
                let (l, r) = (self.segments[i - 1].eval(x), self.segments[i].eval(x));
                (l - r).abs() / l.abs().max(r.abs()).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}
