//! Muckenhoupt `A_p` ratios of piecewise power-law weights over interval
//! sweeps, and the per-stage audits of the weight construction.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::io::fmt17;
use crate::power_arcs::{integrate_power, Interval, PiecewisePowerFn, PowerArc};
use crate::weight::WeightSequence;

/// Flag tolerance for the stage growth audit.
pub const AUDIT_REL_TOL: f64 = 1e-6;
/// Number of leading levels whose maximum sets the audit constant.
pub const AUDIT_WARMUP_LEVELS: usize = 10;
/// Inflation of the warm-up maximum.
pub const AUDIT_MARGIN: f64 = 1.05;

/// Intervals of length `2^{−j}·|window|`, `j_min <= j <= j_max`, with centers
/// stepped by `step` times the length and kept inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub window: Interval,
    pub j_min: u32,
    pub j_max: u32,
    pub step: f64,
}

impl SweepSpec {
    pub fn dyadic(window: Interval, depth: u32) -> Self {
        SweepSpec { window, j_min: 0, j_max: depth, step: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.j_min > self.j_max {
            return Err(Error::InvalidParams(format!("j_min {} > j_max {}", self.j_min, self.j_max)));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::InvalidParams(format!("sweep step must lie in (0, 1], got {}", self.step)));
        }
        if !self.window.is_finite() || self.window.is_degenerate() {
            return Err(Error::InvalidParams("sweep window must be finite and nondegenerate".into()));
        }
        Ok(())
    }

    /// Sweep intervals ordered by scale, then center.
    pub fn intervals(&self) -> Vec<Interval> {
        let width = self.window.len();
        let mut out = Vec::new();
        for j in self.j_min..=self.j_max {
            let len = width * 0.5f64.powi(j as i32);
            let stride = self.step * len;
            let n = ((width - len) / stride + 1e-9).floor() as usize;
            for i in 0..=n {
                let lo = self.window.lo + i as f64 * stride;
                out.push(Interval { lo, hi: (lo + len).min(self.window.hi) });
            }
        }
        out
    }
}

/// `(⨍_I f) (⨍_I f^{1/(1−p)})^{p−1}`.
pub fn ap_ratio(f: &PiecewisePowerFn, iv: Interval, p: f64) -> Result<ExtReal> {
    if !(p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if iv.is_degenerate() {
        return Err(Error::DegenerateInterval(iv.lo));
    }
    let len = iv.len();
    let mean = integrate_power(f, 1.0, iv).to_f64() / len;
    let dual = integrate_power(f, 1.0 / (1.0 - p), iv);
    Ok(match dual {
        ExtReal::Infinite => ExtReal::Infinite,
        ExtReal::Finite(_) if mean == 0.0 => ExtReal::Infinite,
        ExtReal::Finite(d) => ExtReal::finite(mean * (d / len).powf(p - 1.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApRow {
    pub center: f64,
    pub length: f64,
    pub ratio: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApReport {
    pub p: f64,
    pub rows: Vec<ApRow>,
    pub sup: ExtReal,
    pub argmax: Option<Interval>,
}

impl ApReport {
    pub fn infinite_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.ratio.is_infinite()).count()
    }

    /// CSV with header `center,length,ratio`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("center,length,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", fmt17(r.center), fmt17(r.length), r.ratio));
        }
        s
    }
}

fn sweep_sup(f: &PiecewisePowerFn, p: f64, ivs: &[Interval]) -> Result<(ExtReal, Option<Interval>)> {
    let ratios: Vec<ExtReal> = ivs.par_iter().map(|&iv| ap_ratio(f, iv, p)).collect::<Result<_>>()?;
    Ok(argmax(&ratios, ivs))
}

fn argmax(ratios: &[ExtReal], ivs: &[Interval]) -> (ExtReal, Option<Interval>) {
    let mut best = ExtReal::ZERO;
    let mut at = None;
    for (r, iv) in ratios.iter().zip(ivs) {
        if at.is_none() || *r > best {
            best = *r;
            at = Some(*iv);
        }
    }
    (best, at)
}

/// `A_p` ratio over every interval of the sweep.
pub fn ap_scan(f: &PiecewisePowerFn, p: f64, sweep: &SweepSpec) -> Result<ApReport> {
    sweep.validate()?;
    let ivs = sweep.intervals();
    let ratios: Vec<ExtReal> = ivs.par_iter().map(|&iv| ap_ratio(f, iv, p)).collect::<Result<_>>()?;
    let (sup, argmax) = argmax(&ratios, &ivs);
    let rows =
        ivs.iter().zip(ratios).map(|(iv, ratio)| ApRow { center: iv.center(), length: iv.len(), ratio }).collect();
    Ok(ApReport { p, rows, sup, argmax })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub k: usize,
    pub sup: ExtReal,
    /// `ε_k`; zero for the base level.
    pub epsilon: f64,
    pub flag: bool,
}

/// Sup of the `A_p` ratio per level, with the one-step growth flags
/// `S_k <= max((1+ε_k)^p S_{k−1}, C_emp)·(1 + 1e−6)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthAudit {
    pub p: f64,
    pub rows: Vec<AuditRow>,
    /// Max of `S_k` over the first ten levels, times 1.05.
    pub c_emp: f64,
    /// `C_emp · Π_k (1 + ε_k)^p`.
    pub product_bound: f64,
    pub max_sup: ExtReal,
}

impl GrowthAudit {
    pub fn all_flags(&self) -> bool {
        self.rows.iter().all(|r| r.flag)
    }

    pub fn bounded(&self) -> bool {
        self.max_sup <= ExtReal::finite(self.product_bound)
    }

    /// CSV with header `k,S_k,eps_k,flag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,S_k,eps_k,flag\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.k, r.sup, fmt17(r.epsilon), r.flag));
        }
        s
    }
}

pub fn stage_growth_audit(seq: &WeightSequence, p: f64, sweep: &SweepSpec) -> Result<GrowthAudit> {
    let alpha = seq.params.alpha;
    if !(p > 1.0 + alpha) {
        return Err(Error::InvalidExponent(p));
    }
    sweep.validate()?;
    let ivs = sweep.intervals();
    let sups: Vec<ExtReal> =
        seq.levels().iter().map(|w| sweep_sup(w, p, &ivs).map(|(s, _)| s)).collect::<Result<_>>()?;
    let warm = sups.iter().take(AUDIT_WARMUP_LEVELS).fold(ExtReal::ZERO, |a, &b| a.max(b));
    let c_emp = warm.to_f64() * AUDIT_MARGIN;
    let mut rows = vec![AuditRow { k: 0, sup: sups[0], epsilon: 0.0, flag: sups[0].is_finite() }];
    let mut product = 1.0;
    for k in 1..sups.len() {
        let eps = seq.stage(k).epsilon;
        product *= (1.0 + eps).powf(p);
        let flag = match (sups[k], sups[k - 1]) {
            (ExtReal::Finite(s), ExtReal::Finite(prev)) => {
                s <= ((1.0 + eps).powf(p) * prev).max(c_emp) * (1.0 + AUDIT_REL_TOL)
            }
            _ => false,
        };
        rows.push(AuditRow { k, sup: sups[k], epsilon: eps, flag });
    }
    let max_sup = sups.iter().fold(ExtReal::ZERO, |a, &b| a.max(b));
    Ok(GrowthAudit { p, rows, c_emp, product_bound: c_emp * product, max_sup })
}

/// `max(2^α, 2^p · (2/(α+1)) · (2/(α/(1−p)+1))^{p−1})`, valid for every interval.
pub fn xalpha_bound(alpha: f64, p: f64) -> f64 {
    let one_sided = (2.0 / (alpha + 1.0)) * (2.0 / (alpha / (1.0 - p) + 1.0)).powf(p - 1.0);
    2f64.powf(alpha).max(2f64.powf(p) * one_sided)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XAlphaReport {
    pub sup: f64,
    pub argmax: Option<Interval>,
    pub bound: f64,
}

/// Sup of the `A_p` ratio of `|x|^α` over a sweep, with the analytic bound.
pub fn xalpha_ap_constant(alpha: f64, p: f64, sweep: &SweepSpec) -> Result<XAlphaReport> {
    if !(p > 1.0 + alpha) {
        return Err(Error::InvalidExponent(p));
    }
    sweep.validate()?;
    let f = PiecewisePowerFn::from_arc(PowerArc::new(0.0, 1.0, alpha)?);
    let (sup, argmax) = sweep_sup(&f, p, &sweep.intervals())?;
    let sup = sup.value().ok_or_else(|| Error::PreconditionViolated("infinite ratio for p > 1 + α".into()))?;
    Ok(XAlphaReport { sup, argmax, bound: xalpha_bound(alpha, p) })
}

/// Both sides of `∫_{I_k} w_k ≤ ε_k ∫_{J_k^±} w_{k−1}` and the dual-exponent
/// analogue, for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncreaseCertificate {
    pub k: usize,
    pub mass_inner: ExtReal,
    pub mass_outer: [ExtReal; 2],
    pub dual_inner: ExtReal,
    pub dual_outer: [ExtReal; 2],
}

impl IncreaseCertificate {
    pub fn holds(&self, eps: f64) -> bool {
        self.mass_outer.iter().all(|o| self.mass_inner <= o.scale(eps))
            && self.dual_outer.iter().all(|o| self.dual_inner <= o.scale(eps))
    }
}

pub fn increase_certificate(seq: &WeightSequence, k: usize, p: f64) -> Result<IncreaseCertificate> {
    if !(p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let stage = seq.stage(k);
    let (cur, prev) = (seq.level(k), seq.level(k - 1));
    let s = 1.0 / (1.0 - p);
    let outer = [stage.outer_left(), stage.outer_right()];
    Ok(IncreaseCertificate {
        k,
        mass_inner: integrate_power(cur, 1.0, stage.support()),
        mass_outer: outer.map(|j| integrate_power(prev, 1.0, j)),
        dual_inner: integrate_power(cur, s, stage.support()),
        dual_outer: outer.map(|j| integrate_power(prev, s, j)),
    })
}

/// Sup over the sweep of `μ(2I)/μ(I)` for `μ = f·Lebesgue`.
pub fn doubling_sup(f: &PiecewisePowerFn, sweep: &SweepSpec) -> Result<ExtReal> {
    sweep.validate()?;
    let ratios: Vec<ExtReal> = sweep
        .intervals()
        .par_iter()
        .map(|iv| {
            let inner = integrate_power(f, 1.0, *iv).to_f64();
            let outer = integrate_power(f, 1.0, iv.doubled()).to_f64();
            if inner == 0.0 {
                ExtReal::Infinite
            } else {
                ExtReal::finite(outer / inner)
            }
        })
        .collect();
    Ok(ratios.into_iter().fold(ExtReal::ZERO, ExtReal::max))
}
