//! Closed-form integration of powers of piecewise power-law functions.
//!
//! Singular behaviour at arc centers is always decided from exponents, never
//! from numerics; quadrature only ever sees bounded integrands.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

use super::arc::{Interval, PowerArc};
use super::piecewise::PiecewisePowerFn;
use super::quadrature::{self, DEFAULT_REL_TOL};

/// `r̄ = e^{α(α+1)}`, the log-correction scale.
pub fn log_scale(alpha: f64) -> f64 {
    (alpha * (alpha + 1.0)).exp()
}

/// Slack above 1 tolerated in the log-corrected precondition. Crossings of
/// steep bumps are rounded to `f64`, so a built level can exceed its
/// neighbour by a few ulps times the bump slope.
pub const LOG_UPPER_SLACK: f64 = 1e-6;

/// `∫_{t0}^{t1} t^m dt` for `0 <= t0 <= t1`; infinite when `t0 = 0` and `m <= -1`.
fn radial_power(t0: f64, t1: f64, m: f64) -> ExtReal {
    if t0 == t1 {
        return ExtReal::ZERO;
    }
    if t0 == 0.0 {
        return if m <= -1.0 { ExtReal::Infinite } else { ExtReal::finite(t1.powf(m + 1.0) / (m + 1.0)) };
    }
    let ratio_ln = (t1 / t0).ln();
    if m == -1.0 {
        return ExtReal::finite(ratio_ln);
    }
    let k = m + 1.0;
    // t0^k (exp(k ln(t1/t0)) - 1) / k, stable as k -> 0
    ExtReal::finite(t0.powf(k) * (k * ratio_ln).exp_m1() / k)
}

/// `∫_piece |x − center|^m dx`.
fn centered_power(center: f64, m: f64, piece: Interval) -> ExtReal {
    let d0 = piece.lo - center;
    let d1 = piece.hi - center;
    if d0 <= 0.0 && d1 >= 0.0 {
        radial_power(0.0, -d0, m) + radial_power(0.0, d1, m)
    } else {
        let (near, far) = if d0 > 0.0 { (d0, d1) } else { (-d1, -d0) };
        radial_power(near, far, m)
    }
}

/// `∫_piece arc^s dx`.
fn arc_power(arc: &PowerArc, s: f64, piece: Interval) -> ExtReal {
    let len = piece.len();
    if len == 0.0 {
        return ExtReal::ZERO;
    }
    if arc.is_zero() {
        return if s > 0.0 {
            ExtReal::ZERO
        } else if s == 0.0 {
            ExtReal::finite(len)
        } else {
            ExtReal::Infinite
        };
    }
    if arc.is_constant() || s == 0.0 {
        return ExtReal::finite(arc.coeff.powf(s) * len);
    }
    centered_power(arc.center, arc.exponent * s, piece).scale(arc.coeff.powf(s))
}

/// `∫_I f(x)^s dx` for any real `s`, exactly.
///
/// Infinite iff some arc center with `e·s <= −1` lies in the closure of its
/// segment's overlap with `iv` (or a zero segment meets `iv` with `s < 0`).
pub fn integrate_power(f: &PiecewisePowerFn, s: f64, iv: Interval) -> ExtReal {
    debug_assert!(iv.is_finite(), "integration interval must be finite");
    if iv.is_degenerate() {
        return ExtReal::ZERO;
    }
    f.pieces(iv).into_iter().map(|(i, piece)| arc_power(&f.segments()[i], s, piece)).sum()
}

/// One-sided log-corrected radial integral
/// `∫_{t0}^{t1} c^σ t^{eσ} |ln(c t^e / r̄)|^{−θ} dt`, `e > 0`, `c t1^e < r̄`.
fn radial_log(c: f64, e: f64, sigma: f64, theta: f64, ln_rbar: f64, t0: f64, t1: f64) -> ExtReal {
    if t0 == t1 {
        return ExtReal::ZERO;
    }
    let d = c.ln() - ln_rbar;
    // v(u) = -(e u + d) > 0 with u = ln t
    let v = |u: f64| -(e * u + d);
    let kappa = e * sigma + 1.0;
    let scale = c.powf(sigma);
    let u1 = t1.ln();
    if kappa.abs() <= 1e-12 {
        let v1 = v(u1);
        return if t0 == 0.0 {
            if theta > 1.0 {
                ExtReal::finite(scale * v1.powf(1.0 - theta) / (e * (theta - 1.0)))
            } else {
                ExtReal::Infinite
            }
        } else {
            let v0 = v(t0.ln());
            let val = if theta == 1.0 {
                (v0.ln() - v1.ln()) / e
            } else {
                (v1.powf(1.0 - theta) - v0.powf(1.0 - theta)) / (e * (theta - 1.0))
            };
            ExtReal::finite(scale * val.max(0.0))
        };
    }
    if t0 == 0.0 && kappa < 0.0 {
        return ExtReal::Infinite;
    }
    let u0 = if t0 == 0.0 { u1 - 40.0 / kappa } else { t0.ln() };
    let g = |u: f64| (kappa * (u - u1)).exp() * v(u).powf(-theta);
    let val = quadrature::integrate(g, u0, u1, DEFAULT_REL_TOL) * (kappa * u1).exp();
    ExtReal::finite(scale * val.max(0.0))
}

fn arc_power_log(arc: &PowerArc, sigma: f64, theta: f64, ln_rbar: f64, piece: Interval) -> ExtReal {
    let len = piece.len();
    if len == 0.0 {
        return ExtReal::ZERO;
    }
    if arc.is_zero() {
        return if sigma < 0.0 { ExtReal::Infinite } else { ExtReal::ZERO };
    }
    if arc.is_constant() {
        let l = (arc.coeff.ln() - ln_rbar).abs();
        return if l == 0.0 {
            ExtReal::Infinite
        } else {
            ExtReal::finite(arc.coeff.powf(sigma) * l.powf(-theta) * len)
        };
    }
    let (c, e) = (arc.coeff, arc.exponent);
    let d0 = piece.lo - arc.center;
    let d1 = piece.hi - arc.center;
    if d0 <= 0.0 && d1 >= 0.0 {
        radial_log(c, e, sigma, theta, ln_rbar, 0.0, -d0) + radial_log(c, e, sigma, theta, ln_rbar, 0.0, d1)
    } else {
        let (near, far) = if d0 > 0.0 { (d0, d1) } else { (-d1, -d0) };
        radial_log(c, e, sigma, theta, ln_rbar, near, far)
    }
}

/// `∫_I f^σ |ln(f/r̄)|^{−θ} dx` with `r̄ = e^{α(α+1)}`; requires `f <= 1` on `I`
/// up to `LOG_UPPER_SLACK`.
pub fn integrate_power_log(f: &PiecewisePowerFn, sigma: f64, alpha: f64, theta: f64, iv: Interval) -> Result<ExtReal> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
    }
    if iv.is_degenerate() {
        return Ok(ExtReal::ZERO);
    }
    let (_, max) = f.extrema(iv);
    if max > 1.0 + LOG_UPPER_SLACK {
        return Err(Error::PreconditionViolated(format!(
            "log-corrected integrand needs f <= 1 on [{}, {}], max is {max}",
            iv.lo, iv.hi
        )));
    }
    let ln_rbar = alpha * (alpha + 1.0);
    Ok(f.pieces(iv).into_iter().map(|(i, piece)| arc_power_log(&f.segments()[i], sigma, theta, ln_rbar, piece)).sum())
}

/// `∫_I f^{−β} |ln(f/r̄)|^{−θ} dx` with `β = 1/α`.
pub fn integrate_log_corrected(f: &PiecewisePowerFn, alpha: f64, theta: f64, iv: Interval) -> Result<ExtReal> {
    integrate_power_log(f, -1.0 / alpha, alpha, theta, iv)
}

/// `∫_piece |x − a|^m · h(x) dx` with `m > −1`, `h` bounded; the
/// substitution `y = |x − a|^{m+1}` removes the endpoint singularity at `a`.
fn singular_endpoint<H: Fn(f64) -> f64>(a: f64, m: f64, piece: Interval, h: H) -> f64 {
    let k = m + 1.0;
    if piece.lo >= a {
        let (y0, y1) = ((piece.lo - a).powf(k), (piece.hi - a).powf(k));
        quadrature::integrate(|y| h(a + y.powf(1.0 / k)), y0, y1, DEFAULT_REL_TOL) / k
    } else {
        let (y0, y1) = ((a - piece.hi).powf(k), (a - piece.lo).powf(k));
        quadrature::integrate(|y| h(a - y.powf(1.0 / k)), y0, y1, DEFAULT_REL_TOL) / k
    }
}

/// `∫_piece arc1^s · arc2 dx`.
fn arc_product(arc1: &PowerArc, s: f64, arc2: &PowerArc, piece: Interval) -> ExtReal {
    if piece.len() == 0.0 || arc2.is_zero() {
        return ExtReal::ZERO;
    }
    if arc1.is_zero() {
        return if s > 0.0 {
            ExtReal::ZERO
        } else if s == 0.0 {
            arc_power(arc2, 1.0, piece)
        } else {
            ExtReal::Infinite
        };
    }
    let m1 = arc1.exponent * s;
    let m2 = arc2.exponent;
    let k = arc1.coeff.powf(s) * arc2.coeff;
    if m1 == 0.0 {
        return centered_power(arc2.center, m2, piece).scale(k);
    }
    if m2 == 0.0 {
        return centered_power(arc1.center, m1, piece).scale(k);
    }
    if arc1.center == arc2.center {
        return centered_power(arc1.center, m1 + m2, piece).scale(k);
    }
    let (a1, a2) = (arc1.center, arc2.center);
    if piece.contains(a1) && m1 <= -1.0 {
        return ExtReal::Infinite;
    }
    // split at both centers so every sub-piece is smooth inside
    let mut cuts = vec![piece.lo];
    for c in [a1.min(a2), a1.max(a2)] {
        if c > piece.lo && c < piece.hi {
            cuts.push(c);
        }
    }
    cuts.push(piece.hi);
    let h = |x: f64| (x - a2).abs().powf(m2);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let sub = Interval { lo: w[0], hi: w[1] };
        let touches = sub.lo == a1 || sub.hi == a1;
        total += if m1 < 0.0 && touches {
            singular_endpoint(a1, m1, sub, h)
        } else {
            quadrature::integrate(|x| (x - a1).abs().powf(m1) * h(x), sub.lo, sub.hi, DEFAULT_REL_TOL)
        };
    }
    ExtReal::finite(k * total.max(0.0))
}

/// `∫_I f^s · h dx`, exact in divergence and in every same-center or
/// constant-factor piece.
pub fn integrate_product(f: &PiecewisePowerFn, s: f64, h: &PiecewisePowerFn, iv: Interval) -> ExtReal {
    if iv.is_degenerate() {
        return ExtReal::ZERO;
    }
    let mut total = ExtReal::ZERO;
    for (i, piece) in f.pieces(iv) {
        for (j, sub) in h.pieces(piece) {
            total = total + arc_product(&f.segments()[i], s, &h.segments()[j], sub);
            if total.is_infinite() {
                return total;
            }
        }
    }
    total
}
