//! Stage-by-stage construction of the weight `w_K = min(1, g_1, …, g_K)`.
//!
//! Stage `k` places the bump `g_k(x) = 2L_k |(x − q_k)/r_k|^α` at the `k`-th
//! enumerated rational, where `L_k = w_{k−1}(q_k)`, and takes the pointwise
//! minimum on `[q_k − r_k, q_k + r_k]`. Level 0 is the constant 1.

mod product;

pub use product::{box_sum_bound, mc_integral_nd, McEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::power_arcs::{Interval, PiecewisePowerFn, PowerArc};
use crate::rationals::{enumerate_rationals, Rational};

/// Budget sequence `ε_k`; both rules have `Π(1 + ε_k) < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonRule {
    /// `ε_k = 1/(k+1)²`.
    #[default]
    InverseSquare,
    /// `ε_k = 2^{−k}`. Bump widths fall below `f64` resolution after a few
    /// dozen stages; the builder reports that as `ResolutionLoss`.
    Geometric,
}

impl EpsilonRule {
    pub fn epsilon(&self, k: usize) -> f64 {
        match self {
            EpsilonRule::InverseSquare => 1.0 / ((k + 1) as f64).powi(2),
            EpsilonRule::Geometric => 0.5f64.powi(k as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub alpha: f64,
    pub window: Interval,
    pub stages: usize,
    #[serde(default)]
    pub epsilon_rule: EpsilonRule,
}

impl ConstructionParams {
    pub fn new(alpha: f64, window: Interval, stages: usize) -> Self {
        ConstructionParams { alpha, window, stages, epsilon_rule: EpsilonRule::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !self.window.is_finite() || self.window.lo >= self.window.hi {
            return Err(Error::InvalidParams("window must be finite and nondegenerate".into()));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.alpha
    }
}

/// `max(2/α, 1)`: the supremum over `p > 1 + α` of `(p − α + 1)/(p − 1)`.
pub fn uniform_width_factor(alpha: f64) -> f64 {
    (2.0 / alpha).max(1.0)
}

/// One bump of the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub k: usize,
    pub q: Rational,
    pub epsilon: f64,
    /// `w_{k−1}(q_k)`.
    pub level: f64,
    /// Oscillation radius `R_k`.
    pub big_r: f64,
    /// Bump half-width `r_k`.
    pub r: f64,
    pub bump: PowerArc,
}

/// Per-stage verification of the constraints the stage was chosen to meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageAudit {
    pub oscillation: bool,
    pub height: bool,
    pub width: bool,
    pub width_uniform: bool,
    pub ordered: bool,
}

impl StageAudit {
    pub fn all(&self) -> bool {
        self.oscillation && self.height && self.width && self.width_uniform && self.ordered
    }
}

impl Stage {
    pub fn center(&self) -> f64 {
        self.q.value
    }

    /// `I_k = [q − r, q + r]`.
    pub fn support(&self) -> Interval {
        Interval::around(self.center(), self.r)
    }

    /// `J_k^+ = [q + r, q + R]`.
    pub fn outer_right(&self) -> Interval {
        Interval { lo: self.center() + self.r, hi: self.center() + self.big_r }
    }

    /// `J_k^- = [q − R, q − r]`.
    pub fn outer_left(&self) -> Interval {
        Interval { lo: self.center() - self.big_r, hi: self.center() - self.r }
    }

    /// `[q − 4R, q + 4R]`, where the previous level oscillates by at most 2.
    pub fn oscillation_window(&self) -> Interval {
        Interval::around(self.center(), 4.0 * self.big_r)
    }

    pub fn audit(&self, prev: &PiecewisePowerFn, alpha: f64) -> StageAudit {
        let (lo, hi) = prev.extrema(self.oscillation_window());
        let slack = self.epsilon * (self.big_r - self.r);
        StageAudit {
            oscillation: lo >= 0.5 * self.level && hi <= 2.0 * self.level,
            height: self.r <= self.level.powf(1.0 / alpha) * self.epsilon,
            width: 8.0 * self.r <= slack,
            width_uniform: 2.0 * self.r * uniform_width_factor(alpha) <= slack,
            ordered: 0.0 < self.r && self.r < self.big_r,
        }
    }
}

/// Largest `R` on the ladder `R₀, R₀/2, …` with
/// `prev([q − 4R, q + 4R]) ⊆ [prev(q)/2, 2 prev(q)]`,
/// where `R₀ = min(1, dist(q, ∂window)/4)`.
pub fn choose_big_r(prev: &PiecewisePowerFn, q: f64, window: Interval) -> Result<f64> {
    let level = prev.eval(q);
    if level <= 0.0 {
        return Err(Error::ZeroAtCenter(q));
    }
    let dist = (q - window.lo).min(window.hi - q);
    let mut big_r = (dist / 4.0).min(1.0);
    while big_r > 0.0 {
        let (lo, hi) = prev.extrema(Interval::around(q, 4.0 * big_r));
        if lo >= 0.5 * level && hi <= 2.0 * level {
            return Ok(big_r);
        }
        big_r *= 0.5;
    }
    Err(Error::NoRadius { k: 0, q })
}

/// Half of the largest `r` meeting the height, width and uniform-width
/// constraints.
pub fn choose_r(level: f64, big_r: f64, eps: f64, alpha: f64) -> f64 {
    let c = uniform_width_factor(alpha);
    0.5 * (level.powf(1.0 / alpha) * eps).min(eps * big_r / (8.0 + eps)).min(eps * big_r / (2.0 * c + eps))
}

/// Apply one bump at `q` to `prev`.
pub fn build_stage(
    prev: &PiecewisePowerFn,
    k: usize,
    q: Rational,
    eps: f64,
    alpha: f64,
    window: Interval,
) -> Result<(Stage, PiecewisePowerFn)> {
    let qv = q.value;
    let big_r = choose_big_r(prev, qv, window).map_err(|e| match e {
        Error::NoRadius { q, .. } => Error::NoRadius { k, q },
        e => e,
    })?;
    let level = prev.eval(qv);
    let r = choose_r(level, big_r, eps, alpha);
    let coeff = 2.0 * level / r.powf(alpha);
    let bump = PowerArc::new(qv, coeff, alpha).map_err(|_| Error::ResolutionLoss { k, q: qv, r })?;
    let next = prev.min_with(&bump, Interval::around(qv, r))?;
    if next.eval(qv) != 0.0 || !next.zero_set().contains(&qv) {
        return Err(Error::ResolutionLoss { k, q: qv, r });
    }
    let stage = Stage { k, q, epsilon: eps, level, big_r, r, bump };
    Ok((stage, next))
}

/// A built weight: the stage ledger and every level `w_0 ≡ 1, …, w_K`.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    pub params: ConstructionParams,
    pub stages: Vec<Stage>,
    levels: Vec<PiecewisePowerFn>,
}

impl WeightSequence {
    pub fn build(params: ConstructionParams) -> Result<Self> {
        params.validate()?;
        let centers = enumerate_rationals(params.window, params.stages)?;
        let mut levels = Vec::with_capacity(params.stages + 1);
        levels.push(PiecewisePowerFn::constant(1.0)?);
        let mut stages = Vec::with_capacity(params.stages);
        for (i, q) in centers.into_iter().enumerate() {
            let k = i + 1;
            let eps = params.epsilon_rule.epsilon(k);
            let (stage, next) = build_stage(&levels[k - 1], k, q, eps, params.alpha, params.window)?;
            stages.push(stage);
            levels.push(next);
        }
        Ok(WeightSequence { params, stages, levels })
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// `w_k`, `0 <= k <= K`.
    pub fn level(&self, k: usize) -> &PiecewisePowerFn {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[PiecewisePowerFn] {
        &self.levels
    }

    pub fn final_level(&self) -> &PiecewisePowerFn {
        self.levels.last().expect("level 0 always present")
    }

    pub fn stage(&self, k: usize) -> &Stage {
        &self.stages[k - 1]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.stages.iter().map(Stage::center).collect()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.epsilon).collect()
    }

    /// `w_k(x)` straight from the ledger, without the piecewise form.
    pub fn weight_at(&self, k: usize, x: f64) -> f64 {
        self.stages[..k].iter().filter(|s| (x - s.center()).abs() <= s.r).map(|s| s.bump.eval(x)).fold(1.0, f64::min)
    }

    /// `ŵ(x) = min_i w_K(x_i)`.
    pub fn product_weight_at(&self, point: &[f64]) -> f64 {
        let w = self.final_level();
        point.iter().map(|&x| w.eval(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn audit_stage(&self, k: usize) -> StageAudit {
        self.stage(k).audit(self.level(k - 1), self.params.alpha)
    }

    /// Stage ledger as CSV, header `k,q_num,q_den,epsilon,L,R,r`.
    pub fn stage_table_csv(&self) -> String {
        let mut out = String::from("k,q_num,q_den,epsilon,L,R,r\n");
        for s in &self.stages {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.k,
                s.q.numer(),
                s.q.denom(),
                fmt17(s.epsilon),
                fmt17(s.level),
                fmt17(s.big_r),
                fmt17(s.r)
            ));
        }
        out
    }
}
