//! Maximum-entropy duals over a family of binary patterns.
//!
//! For a finite set `P` of patterns in `{0,1}^d` and targets `s`, the
//! objective
//!
//! ```text
//! f(r) = s . r - ln sum_{y in P} exp(y . r)
//! ```
//!
//! is concave, its gradient is `s - E_r[y]` and its Hessian is `-Cov_r[y]`,
//! where expectations are under the exponential-family distribution
//! `p_r(y) ~ exp(y . r)` on `P`. The maximizer exists iff `s` lies in the
//! relative interior of `conv(P)`; otherwise `r` runs off to infinity, which
//! is reported as divergence.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Newton direction with Armijo backtracking; falls back to the gradient
    /// when the covariance is numerically singular.
    DampedNewton,
    GradientAscentBacktracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Threshold on the infinity norm of the gradient.
    pub tolerance: f64,
    pub max_iters: usize,
    pub method: SolverMethod,
    /// `||r||_inf` beyond which the targets are declared unsupportable.
    pub divergence_norm: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iters: 500, method: SolverMethod::DampedNewton, divergence_norm: 50.0 }
    }
}

impl SolverSettings {
    pub fn gradient_ascent() -> Self {
        Self { method: SolverMethod::GradientAscentBacktracking, max_iters: 200_000, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntSolution {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Objective value at every iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaxEntFailure {
    Diverged { norm: f64, iterations: usize },
    NotConverged { gradient_norm: f64, iterations: usize },
}

impl std::fmt::Display for MaxEntFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaxEntFailure::Diverged { norm, iterations } => {
                write!(f, "parameters diverged (|r|_inf = {norm:.3e} after {iterations} iterations)")
            }
            MaxEntFailure::NotConverged { gradient_norm, iterations } => {
                write!(f, "no convergence after {iterations} iterations (|grad|_inf = {gradient_norm:.3e})")
            }
        }
    }
}

#[inline]
fn dot_pattern(pattern: u32, r: &[f64]) -> f64 {
    let mut bits = pattern;
    let mut acc = 0.0;
    while bits != 0 {
        let k = bits.trailing_zeros() as usize;
        acc += r[k];
        bits &= bits - 1;
    }
    acc
}

/// `ln sum_y exp(y . r)`.
pub fn log_partition(patterns: &[u32], r: &[f64]) -> f64 {
    let max = patterns.iter().map(|&y| dot_pattern(y, r)).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = patterns.iter().map(|&y| (dot_pattern(y, r) - max).exp()).sum();
    max + sum.ln()
}

/// Normalized probabilities of each pattern under `p_r`.
pub fn pattern_probabilities(patterns: &[u32], r: &[f64]) -> Vec<f64> {
    let lz = log_partition(patterns, r);
    patterns.iter().map(|&y| (dot_pattern(y, r) - lz).exp()).collect()
}

/// `E_r[y_k]` for every coordinate.
pub fn mean(patterns: &[u32], dim: usize, r: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    for (&y, p) in patterns.iter().zip(pattern_probabilities(patterns, r)) {
        let mut bits = y;
        while bits != 0 {
            m[bits.trailing_zeros() as usize] += p;
            bits &= bits - 1;
        }
    }
    m
}

pub fn objective(patterns: &[u32], targets: &[f64], r: &[f64]) -> f64 {
    let lin: f64 = targets.iter().zip(r).map(|(s, x)| s * x).sum();
    lin - log_partition(patterns, r)
}

pub fn gradient(patterns: &[u32], targets: &[f64], r: &[f64]) -> Vec<f64> {
    let m = mean(patterns, targets.len(), r);
    targets.iter().zip(m).map(|(s, m)| s - m).collect()
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    cov: Option<DMatrix<f64>>,
}

fn evaluate(patterns: &[u32], targets: &[f64], r: &[f64], with_cov: bool) -> Eval {
    let dim = targets.len();
    let logits: Vec<f64> = patterns.iter().map(|&y| dot_pattern(y, r)).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut first = vec![0.0; dim];
    let mut second = with_cov.then(|| DMatrix::<f64>::zeros(dim, dim));
    let mut idx = Vec::with_capacity(dim);
    for (&y, &a) in patterns.iter().zip(&logits) {
        let w = (a - max).exp();
        total += w;
        idx.clear();
        let mut bits = y;
        while bits != 0 {
            idx.push(bits.trailing_zeros() as usize);
            bits &= bits - 1;
        }
        for &k in &idx {
            first[k] += w;
        }
        if let Some(m2) = second.as_mut() {
            for &k in &idx {
                for &l in &idx {
                    m2[(k, l)] += w;
                }
            }
        }
    }
    let lz = max + total.ln();
    let mean: Vec<f64> = first.iter().map(|v| v / total).collect();
    let value = targets.iter().zip(r).map(|(s, x)| s * x).sum::<f64>() - lz;
    let grad = targets.iter().zip(&mean).map(|(s, m)| s - m).collect();
    let cov = second.map(|m2| {
        let mv = DVector::from_column_slice(&mean);
        m2 / total - &mv * mv.transpose()
    });
    Eval { value, grad, cov }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Largest single step, in the infinity norm.
const MAX_STEP: f64 = 20.0;
const ARMIJO: f64 = 1e-4;

/// Maximizes `f` starting from `init`.
///
/// Accepted iterates never decrease the objective by more than a rounding
/// slack of `1e-14 * max(1, |f|)`.
pub fn maximize(
    patterns: &[u32],
    targets: &[f64],
    settings: &SolverSettings,
    init: &[f64],
) -> Result<MaxEntSolution, MaxEntFailure> {
    assert_eq!(targets.len(), init.len(), "targets and init must have the same dimension");
    let newton = settings.method == SolverMethod::DampedNewton;
    let mut r = init.to_vec();
    let mut trace = Vec::new();
    let mut eval = evaluate(patterns, targets, &r, newton);
    trace.push(eval.value);

    for iteration in 0..settings.max_iters {
        let gnorm = inf_norm(&eval.grad);
        if gnorm <= settings.tolerance && at_maximizer(patterns, targets, &r, &eval) {
            return Ok(MaxEntSolution {
                params: r,
                iterations: iteration,
                gradient_norm: gnorm,
                objective_trace: trace,
            });
        }
        let rnorm = inf_norm(&r);
        if rnorm > settings.divergence_norm {
            return Err(MaxEntFailure::Diverged { norm: rnorm, iterations: iteration });
        }

        let gradient_dir = eval.grad.clone();
        let mut directions = Vec::with_capacity(2);
        if let Some(dir) = eval.cov.as_ref().and_then(|c| newton_direction(c, &eval.grad)) {
            directions.push(dir);
        }
        directions.push(gradient_dir);

        let slack = 1e-14 * eval.value.abs().max(1.0);
        let mut accepted = None;
        for mut dir in directions {
            let slope: f64 = dir.iter().zip(&eval.grad).map(|(d, g)| d * g).sum();
            if !(slope > 0.0) {
                continue;
            }
            let dnorm = inf_norm(&dir);
            if dnorm > MAX_STEP {
                dir.iter_mut().for_each(|d| *d *= MAX_STEP / dnorm);
            }
            let slope: f64 = dir.iter().zip(&eval.grad).map(|(d, g)| d * g).sum();
            let mut t = 1.0;
            while t > 1e-16 {
                let trial: Vec<f64> = r.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
                let value = objective(patterns, targets, &trial);
                if value >= eval.value + ARMIJO * t * slope - slack {
                    accepted = Some(trial);
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }

        match accepted {
            Some(next) => {
                r = next;
                eval = evaluate(patterns, targets, &r, newton);
                trace.push(eval.value);
            }
            None => {
                return Err(MaxEntFailure::NotConverged { gradient_norm: gnorm, iterations: iteration });
            }
        }
    }

    let gnorm = inf_norm(&eval.grad);
    if gnorm <= settings.tolerance && at_maximizer(patterns, targets, &r, &eval) {
        return Ok(MaxEntSolution {
            params: r,
            iterations: settings.max_iters,
            gradient_norm: gnorm,
            objective_trace: trace,
        });
    }
    let rnorm = inf_norm(&r);
    if rnorm > settings.divergence_norm {
        return Err(MaxEntFailure::Diverged { norm: rnorm, iterations: settings.max_iters });
    }
    Err(MaxEntFailure::NotConverged { gradient_norm: gnorm, iterations: settings.max_iters })
}

/// Largest Newton step accepted at a claimed maximizer.
const NEWTON_STEP_TOL: f64 = 1e-4;

/// A small gradient alone does not certify a maximizer: for targets on the
/// boundary of `conv(P)` the gradient decays like `exp(-|r|)` while the
/// Newton step stays of order one.
fn at_maximizer(patterns: &[u32], targets: &[f64], r: &[f64], eval: &Eval) -> bool {
    let fresh;
    let cov = match &eval.cov {
        Some(c) => c,
        None => {
            fresh = evaluate(patterns, targets, r, true);
            fresh.cov.as_ref().expect("covariance requested")
        }
    };
    newton_direction(cov, &eval.grad).is_some_and(|d| inf_norm(&d) <= NEWTON_STEP_TOL)
}

fn newton_direction(cov: &DMatrix<f64>, grad: &[f64]) -> Option<Vec<f64>> {
    let g = DVector::from_column_slice(grad);
    let chol = cov.clone().cholesky()?;
    let dir = chol.solve(&g);
    dir.iter().all(|x| x.is_finite()).then(|| dir.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_family_is_logit() {
        let sol = maximize(&[0, 1], &[0.4], &SolverSettings::default(), &[0.0]).unwrap();
        assert!((sol.params[0] - (0.4f64 / 0.6).ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let patterns = [0b000, 0b001, 0b010, 0b100, 0b101, 0b011];
        let s = [0.3, 0.25, 0.2];
        let r = [0.3, -0.7, 1.1];
        let g = gradient(&patterns, &s, &r);
        let h = 1e-6;
        for k in 0..3 {
            let mut up = r;
            let mut dn = r;
            up[k] += h;
            dn[k] -= h;
            let fd = (objective(&patterns, &s, &up) - objective(&patterns, &s, &dn)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8, "coord {k}: fd {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn boundary_target_diverges() {
        // 2-clique: s1 + s2 = 1 is on the boundary of conv{00, 10, 01}.
        let res = maximize(&[0b00, 0b01, 0b10], &[0.5, 0.5], &SolverSettings::default(), &[0.0, 0.0]);
        assert!(res.is_err(), "{res:?}");
    }

    #[test]
    fn gradient_ascent_reaches_same_point() {
        let patterns = [0b000, 0b001, 0b010, 0b100, 0b101];
        let s = [0.2, 0.2, 0.2];
        let a = maximize(&patterns, &s, &SolverSettings::default(), &[0.0; 3]).unwrap();
        let b = maximize(&patterns, &s, &SolverSettings::gradient_ascent(), &[0.0; 3]).unwrap();
        for (x, y) in a.params.iter().zip(&b.params) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
