use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ext_real::ExtReal;
use crate::power_arcs::{integrate_power, Interval};

use super::WeightSequence;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte-Carlo estimate of `∫_box ŵ^s`, deterministic in `seed`.
///
/// Samples are drawn in fixed-size chunks, each with its own stream, and
/// reduced in chunk order, so the result does not depend on thread count.
pub fn mc_integral_nd(seq: &WeightSequence, s: f64, bx: &[Interval], samples: usize, seed: u64) -> McEstimate {
    assert!(!bx.is_empty() && samples > 1);
    let volume: f64 = bx.iter().map(Interval::len).product();
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut point = vec![0.0; bx.len()];
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                for (x, side) in point.iter_mut().zip(bx) {
                    *x = side.lo + side.len() * rng.gen::<f64>();
                }
                let v = seq.product_weight_at(&point).powf(s);
                sum += v;
                sq += v * v;
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = partial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    McEstimate { estimate: volume * mean, stderr: volume * (var / n).sqrt(), samples }
}

/// `Σ_i (Π_{j≠i} |box_j|) ∫_{box_i} w_K^s`, an upper bound for `∫_box ŵ^s`
/// when `s <= 0` since `ŵ^s = max_i w(x_i)^s`.
pub fn box_sum_bound(seq: &WeightSequence, s: f64, bx: &[Interval]) -> ExtReal {
    let w = seq.final_level();
    (0..bx.len())
        .map(|i| {
            let others: f64 = bx.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.len()).product();
            integrate_power(w, s, bx[i]).scale(others)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::ConstructionParams;

    #[test]
    fn constant_level_is_exact() {
        let seq = WeightSequence::build(ConstructionParams::new(1.0, Interval::new(0.0, 1.0).unwrap(), 0)).unwrap();
        let unit = Interval::new(0.0, 1.0).unwrap();
        let m = mc_integral_nd(&seq, -0.7, &[unit, unit], 1000, 3);
        assert_eq!(m.estimate, 1.0);
        assert_eq!(m.stderr, 0.0);
    }

    #[test]
    fn deterministic_in_seed() {
        let seq = WeightSequence::build(ConstructionParams::new(1.0, Interval::new(0.0, 1.0).unwrap(), 5)).unwrap();
        let unit = Interval::new(0.0, 1.0).unwrap();
        let a = mc_integral_nd(&seq, -0.5, &[unit, unit], 50_000, 9);
        let b = mc_integral_nd(&seq, -0.5, &[unit, unit], 50_000, 9);
        assert_eq!(a, b);
        let c = mc_integral_nd(&seq, -0.5, &[unit, unit], 50_000, 10);
        assert_ne!(a.estimate, c.estimate);
    }
}
