use super::FeasibleScheduleSet;
use crate::adaptive::Utility;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumSettings {
    /// Stop once the Frank-Wolfe duality gap is at most this.
    pub gap_tolerance: f64,
    pub max_iters: usize,
}

impl Default for OptimumSettings {
    fn default() -> Self {
        Self { gap_tolerance: 1e-10, max_iters: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityOptimum {
    pub y: Vec<f64>,
    pub value: f64,
    /// Certified bound: the optimum lies in `[value, value + gap]`.
    pub gap: f64,
    pub iterations: usize,
}

impl UtilityOptimum {
    pub fn upper_bound(&self) -> f64 {
        self.value + self.gap
    }
}

fn objective(utilities: &[Utility], y: &[f64]) -> f64 {
    utilities.iter().zip(y).map(|(u, &q)| u.value(q)).sum()
}

fn bit(mask: u32, i: usize) -> f64 {
    (mask >> i & 1) as f64
}

/// `max sum_j U_j(y_j)` over the capacity region, by pairwise Frank-Wolfe on
/// the schedule mixture weights, starting from the uniform mixture.
pub fn utility_optimum_bruteforce(
    schedules: &FeasibleScheduleSet,
    utilities: &[Utility],
    settings: &OptimumSettings,
) -> Result<UtilityOptimum> {
    let n = schedules.n_links();
    if utilities.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: utilities.len() });
    }
    let masks = schedules.masks();
    if masks.is_empty() {
        return Err(Error::InvalidParameter("empty schedule set".into()));
    }
    let mut w = vec![1.0 / masks.len() as f64; masks.len()];
    let mut y = vec![0.0; n];
    for (&m, &wv) in masks.iter().zip(&w) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += wv * bit(m, i);
        }
    }

    let score = |grad: &[f64], m: u32| -> f64 { (0..n).filter(|&i| m >> i & 1 == 1).map(|i| grad[i]).sum() };
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < settings.max_iters {
        let grad: Vec<f64> = utilities.iter().zip(&y).map(|(u, &q)| u.derivative(q)).collect();
        // A zero-rate link with an unbounded derivative cannot be improved
        // upon by this bound; report the gap as infinite.
        if grad.iter().any(|g| !g.is_finite()) {
            break;
        }
        let (fw, fw_score) = masks
            .iter()
            .enumerate()
            .map(|(v, &m)| (v, score(&grad, m)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let current: f64 = grad.iter().zip(&y).map(|(g, q)| g * q).sum();
        gap = fw_score - current;
        if gap <= settings.gap_tolerance {
            break;
        }
        let (away, _) = masks
            .iter()
            .enumerate()
            .filter(|(v, _)| w[*v] > 0.0)
            .map(|(v, &m)| (v, score(&grad, m)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let dir: Vec<f64> = (0..n).map(|i| bit(masks[fw], i) - bit(masks[away], i)).collect();
        let max_step = w[away];
        let slope = |g: f64| -> f64 {
            utilities
                .iter()
                .zip(&y)
                .zip(&dir)
                .map(|((u, &q), &d)| if d == 0.0 { 0.0 } else { u.derivative(q + g * d) * d })
                .sum()
        };
        let step = if slope(max_step) >= 0.0 {
            max_step
        } else {
            let (mut lo, mut hi) = (0.0, max_step);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if step <= 0.0 {
            break;
        }
        w[fw] += step;
        w[away] -= step;
        if w[away] < 1e-300 {
            w[away] = 0.0;
        }
        y.iter_mut().zip(&dir).for_each(|(q, d)| *q += step * d);
        iterations += 1;
    }
    Ok(UtilityOptimum { value: objective(utilities, &y), y, gap, iterations })
}
