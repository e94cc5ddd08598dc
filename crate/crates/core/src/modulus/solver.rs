//! Discretized p-modulus of a finite interval-curve family.
//!
//! Minimizes `Σ_c m_c g_c^p` subject to `Σ_{c ⊆ I_j} g_c Δ_c >= 1` over
//! cellwise-constant `g >= 0`, by projected Newton ascent on the concave
//! dual with the closed-form inner minimizer
//! `g_c = (Σ_j λ_j 1[c ⊆ I_j] Δ_c / (p m_c))^{1/(p−1)}`.
//!
//! Multipliers that sit at zero with a pointing-out gradient form the active
//! set and take scaled gradient steps; the rest take a Newton step. Each
//! iterate's `g` is rescaled onto the constraint set to give a primal bound.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::power_arcs::{integrate_power, Interval};

use super::{CurveFamily, MeasureSpec};

pub const GAP_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100_000;
/// Cap for cells of zero `μ_a`-mass, as a multiple of `1/Δ_c`.
pub const ZERO_MASS_CAP: f64 = 10.0;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;
/// Upper bound for the active-set threshold on multipliers.
const ACTIVE_EPS: f64 = 1e-3;
const RIDGE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    /// Primal value of the feasible density `g`.
    pub value: ExtReal,
    /// Relative duality gap `(P − D)/P`.
    pub gap: f64,
    pub iterations: usize,
    /// Cell edges; `g[c]` lives on `[edges[c], edges[c+1]]`.
    pub edges: Vec<f64>,
    pub g: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `max_j (1 − ∫_{I_j} g)^+`.
    pub max_violation: f64,
    /// Some constrained cell has zero density mass and was capped.
    pub regularized: bool,
    pub converged: bool,
}

struct Problem {
    p: f64,
    edges: Vec<f64>,
    width: Vec<f64>,
    mass: Vec<f64>,
    /// Cell range `[start, end)` of each curve.
    ranges: Vec<(usize, usize)>,
    covered: Vec<bool>,
}

struct Eval {
    dual: f64,
    grad: Vec<f64>,
    /// `a_c = Δ_c Σ_{j: c ⊆ I_j} λ_j`.
    a: Vec<f64>,
    g: Vec<f64>,
    /// `∫_{I_j} g` per curve.
    lengths: Vec<f64>,
}

impl Problem {
    fn new(mu: &MeasureSpec, family: &CurveFamily, p: f64, cells: usize) -> Self {
        let hull = family.hull();
        let mut edges: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { hull.hi } else { hull.lo + hull.len() * i as f64 / cells as f64 })
            .collect();
        for iv in family.intervals() {
            edges.push(iv.lo);
            edges.push(iv.hi);
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let cell = |c: usize| Interval { lo: edges[c], hi: edges[c + 1] };
        let n = edges.len() - 1;
        let width: Vec<f64> = (0..n).map(|c| cell(c).len()).collect();
        let mass: Vec<f64> = (0..n).map(|c| integrate_power(mu.density(), 1.0, cell(c)).to_f64()).collect();
        let find = |x: f64| edges.binary_search_by(|e| e.total_cmp(&x)).expect("endpoint is an edge");
        let ranges: Vec<(usize, usize)> = family.intervals().iter().map(|iv| (find(iv.lo), find(iv.hi))).collect();
        let mut covered = vec![false; n];
        for &(s, e) in &ranges {
            covered[s..e].iter_mut().for_each(|c| *c = true);
        }
        Problem { p, edges, width, mass, ranges, covered }
    }

    fn cells(&self) -> usize {
        self.width.len()
    }

    fn evaluate(&self, lambda: &[f64]) -> Eval {
        let n = self.cells();
        // a_c = Δ_c Σ_{j: c ⊆ I_j} λ_j via a difference array
        let mut diff = vec![0.0; n + 1];
        for (&(s, e), &l) in self.ranges.iter().zip(lambda) {
            diff[s] += l;
            diff[e] -= l;
        }
        let expo = 1.0 / (self.p - 1.0);
        let mut running = 0.0;
        let mut g = vec![0.0; n];
        let mut a_all = vec![0.0; n];
        let mut dual: f64 = lambda.iter().sum();
        for c in 0..n {
            running += diff[c];
            let a = running.max(0.0) * self.width[c];
            a_all[c] = a;
            if self.mass[c] > 0.0 {
                if a > 0.0 {
                    g[c] = (a / (self.p * self.mass[c])).powf(expo);
                    dual -= (self.p - 1.0) * self.mass[c] * g[c].powf(self.p);
                }
            } else if self.covered[c] {
                // free cell: the capped inner minimizer
                g[c] = ZERO_MASS_CAP / self.width[c];
                dual -= a * g[c];
            }
        }
        let lengths = self.lengths(&g);
        let grad = lengths.iter().map(|l| 1.0 - l).collect();
        Eval { dual, grad, a: a_all, g, lengths }
    }

    /// `−∂²D/∂λ_j∂λ_k` over `free`, from
    /// `∂ℓ_j/∂λ_k = Σ_{c ⊆ I_j ∩ I_k} Δ_c² g_c / ((p − 1) a_c)`.
    fn neg_hessian(&self, ev: &Eval, free: &[usize]) -> DMatrix<f64> {
        let n = self.cells();
        let mut prefix = vec![0.0; n + 1];
        for c in 0..n {
            let h = if self.mass[c] > 0.0 && ev.a[c] > 0.0 {
                self.width[c] * self.width[c] * ev.g[c] / ((self.p - 1.0) * ev.a[c])
            } else {
                0.0
            };
            prefix[c + 1] = prefix[c] + h;
        }
        let k = free.len();
        let mut m = DMatrix::zeros(k, k);
        for (x, &j) in free.iter().enumerate() {
            for (y, &l) in free.iter().enumerate().skip(x) {
                let (s, e) = (self.ranges[j].0.max(self.ranges[l].0), self.ranges[j].1.min(self.ranges[l].1));
                let v = if s < e { prefix[e] - prefix[s] } else { 0.0 };
                m[(x, y)] = v;
                m[(y, x)] = v;
            }
        }
        m
    }

    fn lengths(&self, g: &[f64]) -> Vec<f64> {
        let mut prefix = vec![0.0; g.len() + 1];
        for c in 0..g.len() {
            prefix[c + 1] = prefix[c] + g[c] * self.width[c];
        }
        self.ranges.iter().map(|&(s, e)| prefix[e] - prefix[s]).collect()
    }

    fn cost(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.mass).map(|(g, m)| m * g.powf(self.p)).sum()
    }

    /// Scale `g` onto the constraint set; `None` if some curve gets nothing.
    fn feasible(&self, ev: &Eval) -> Option<(f64, Vec<f64>)> {
        let min = ev.lengths.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return None;
        }
        let t = 1.0 / min;
        let g: Vec<f64> = ev.g.iter().map(|g| g * t).collect();
        Some((self.cost(&g), g))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected Newton ascent direction, or `None` at a stationary point.
fn direction(prob: &Problem, lambda: &[f64], ev: &Eval) -> Option<Vec<f64>> {
    let proj: f64 = lambda.iter().zip(&ev.grad).map(|(l, d)| ((l + d).max(0.0) - l).powi(2)).sum::<f64>().sqrt();
    if proj == 0.0 {
        return None;
    }
    let delta = proj.min(ACTIVE_EPS);
    let free: Vec<usize> = (0..lambda.len()).filter(|&j| !(lambda[j] <= delta && ev.grad[j] < 0.0)).collect();
    let mut m = prob.neg_hessian(ev, &free);
    let scale = if free.is_empty() { 1.0 } else { m.diagonal().max() };
    let scale = if scale > 0.0 { scale } else { 1.0 };
    // scaled gradient everywhere, replaced by the Newton step on the free set
    let mut dir: Vec<f64> = ev.grad.iter().map(|g| g / scale).collect();
    if !free.is_empty() {
        for i in 0..free.len() {
            m[(i, i)] += RIDGE * scale;
        }
        let rhs = DVector::from_iterator(free.len(), free.iter().map(|&j| ev.grad[j]));
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&rhs);
            for (i, &j) in free.iter().enumerate() {
                dir[j] = d[i];
            }
        }
    }
    Some(dir)
}

/// p-modulus of `family` on a grid of `cells` uniform cells spanning the
/// family's hull, refined at every curve endpoint. Atoms carry no cost.
///
/// Returns `Error::NotConverged` with the best iterate when the relative
/// duality gap stays above `1e−6` after `10⁵` iterations.
pub fn modulus_family_grid(mu: &MeasureSpec, family: &CurveFamily, p: f64, cells: usize) -> Result<ModulusResult> {
    if !(p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if cells == 0 {
        return Err(Error::InvalidParams("grid needs at least one cell".into()));
    }
    let prob = Problem::new(mu, family, p, cells);
    let regularized = (0..prob.cells()).any(|c| prob.mass[c] == 0.0 && prob.covered[c]);

    // start from all-ones scaled so the curves receive unit length on average
    let mut lambda = vec![1.0; family.len()];
    let ev0 = prob.evaluate(&lambda);
    let mean = ev0.lengths.iter().sum::<f64>() / ev0.lengths.len() as f64;
    if mean > 0.0 {
        let t = mean.powf(-(p - 1.0));
        lambda.iter_mut().for_each(|l| *l *= t);
    }
    let mut ev = prob.evaluate(&lambda);
    let mut best_dual = ev.dual;
    let mut best_primal = f64::INFINITY;
    let mut best_g = vec![0.0; prob.cells()];
    let consider = |ev: &Eval, best_primal: &mut f64, best_g: &mut Vec<f64>| {
        if let Some((cost, g)) = prob.feasible(ev) {
            if cost < *best_primal {
                *best_primal = cost;
                *best_g = g;
            }
        }
    };
    consider(&ev, &mut best_primal, &mut best_g);

    let gap_of = |primal: f64, dual: f64| {
        if primal == 0.0 {
            0.0
        } else if primal.is_finite() {
            ((primal - dual) / primal).max(0.0)
        } else {
            f64::INFINITY
        }
    };
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && gap_of(best_primal, best_dual) > GAP_TOL {
        iterations += 1;
        let Some(dir) = direction(&prob, &lambda, &ev) else { break };
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..MAX_BACKTRACK {
            let next: Vec<f64> = lambda.iter().zip(&dir).map(|(l, d)| (l + t * d).max(0.0)).collect();
            let moved: Vec<f64> = next.iter().zip(&lambda).map(|(a, b)| a - b).collect();
            let cand = prob.evaluate(&next);
            if cand.dual >= ev.dual + ARMIJO * dot(&ev.grad, &moved) && moved.iter().any(|&m| m != 0.0) {
                accepted = Some((next, cand));
                break;
            }
            t *= 0.5;
        }
        let Some((next, cand)) = accepted else { break };
        lambda = next;
        ev = cand;
        best_dual = best_dual.max(ev.dual);
        consider(&ev, &mut best_primal, &mut best_g);
    }

    let gap = gap_of(best_primal, best_dual);
    let lengths = prob.lengths(&best_g);
    let max_violation = lengths.iter().map(|l| (1.0 - l).max(0.0)).fold(0.0, f64::max);
    let converged = gap <= GAP_TOL;
    let result = ModulusResult {
        value: if best_primal.is_finite() { ExtReal::finite(best_primal) } else { ExtReal::Infinite },
        gap,
        iterations,
        edges: prob.edges,
        g: best_g,
        lambda,
        max_violation,
        regularized,
        converged,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}
