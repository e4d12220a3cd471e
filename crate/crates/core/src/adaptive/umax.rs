use std::fmt;
use std::sync::Arc;

use super::utility::{one_dim_utility_opt, Utility};
use crate::error::{Error, Result};
use crate::maxent;
use crate::topology::{InterferenceGraph, LocalFeasibleSet};

/// Step size `alpha(t)` of the dual update, for `t >= 1`.
#[derive(Clone)]
pub enum StepSize {
    /// `1 / t`.
    Harmonic,
    /// `1 / sqrt(t)`.
    InvSqrt,
    Constant(f64),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::Harmonic => write!(f, "Harmonic"),
            StepSize::InvSqrt => write!(f, "InvSqrt"),
            StepSize::Constant(a) => write!(f, "Constant({a})"),
            StepSize::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl StepSize {
    pub fn at(&self, t: usize) -> f64 {
        let x = t.max(1) as f64;
        match self {
            StepSize::Harmonic => 1.0 / x,
            StepSize::InvSqrt => 1.0 / x.sqrt(),
            StepSize::Constant(a) => *a,
            StepSize::Custom(f) => f(t),
        }
    }
}

/// Dual iterate of the local utility maximization.
///
/// `betas[j]` is aligned with `N_j` (sorted), so `betas[j][b]` is
/// `beta_{j, N_j[b]}`. `rates` and `marginals` are those of the most recent
/// step, computed before its update.
#[derive(Debug, Clone)]
pub struct UmaxState {
    pub betas: Vec<Vec<f64>>,
    pub rates: Vec<f64>,
    pub marginals: Vec<Vec<f64>>,
    pub iteration: usize,
    pub theta: f64,
    pub step: StepSize,
}

impl UmaxState {
    /// `beta_jk`, if `k in N_j`.
    pub fn beta(&self, graph: &InterferenceGraph, j: usize, k: usize) -> Option<f64> {
        graph.neighborhood(j).binary_search(&k).ok().map(|b| self.betas[j][b])
    }

    /// `c_j = sum_{k in N_j} beta_kj`.
    pub fn incoming_sum(&self, graph: &InterferenceGraph, j: usize) -> f64 {
        graph.neighborhood(j).iter().map(|&k| self.beta(graph, k, j).expect("symmetric graph")).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientReport {
    /// `g_jk = m_jk - s_k`, aligned like `UmaxState::betas`.
    pub g: Vec<Vec<f64>>,
    /// Euclidean norm over all pairs.
    pub norm: f64,
    /// Iteration index `t` at which `g` was evaluated.
    pub iteration: usize,
}

pub fn umax_init(graph: &InterferenceGraph, theta: f64, step: StepSize) -> Result<UmaxState> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!("theta must be positive and finite, got {theta}")));
    }
    let betas: Vec<Vec<f64>> = graph.neighborhoods().iter().map(|n| vec![0.0; n.len()]).collect();
    Ok(UmaxState { marginals: betas.clone(), rates: vec![0.0; graph.n_links()], betas, iteration: 0, theta, step })
}

fn check_shapes(graph: &InterferenceGraph, sets: &[LocalFeasibleSet], utilities: &[Utility]) -> Result<()> {
    let n = graph.n_links();
    for len in [sets.len(), utilities.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, actual: len });
        }
    }
    for (j, set) in sets.iter().enumerate() {
        if set.neighborhood() != graph.neighborhood(j) {
            return Err(Error::InvalidParameter(format!("feasible set {j} does not match N_{j}")));
        }
    }
    Ok(())
}

fn primal_rates(state: &UmaxState, graph: &InterferenceGraph, utilities: &[Utility]) -> Vec<f64> {
    (0..graph.n_links())
        .map(|j| one_dim_utility_opt(&utilities[j], state.theta, state.incoming_sum(graph, j)))
        .collect()
}

/// One synchronous iteration: rates from the one-dimensional problems,
/// factor marginals from the current local fugacities, then
/// `beta_jk -= alpha(t + 1) (m_jk - s_k)`.
pub fn umax_step(
    state: &mut UmaxState,
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    utilities: &[Utility],
) -> Result<SubgradientReport> {
    check_shapes(graph, sets, utilities)?;
    let rates = primal_rates(state, graph, utilities);
    let marginals: Vec<Vec<f64>> =
        sets.iter().zip(&state.betas).map(|(set, b)| maxent::mean(set.members(), set.dim(), b)).collect();
    let g: Vec<Vec<f64>> = marginals
        .iter()
        .enumerate()
        .map(|(j, m)| m.iter().zip(graph.neighborhood(j)).map(|(m, &k)| m - rates[k]).collect())
        .collect();
    let norm = g.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let alpha = state.step.at(state.iteration + 1);
    for (b, gj) in state.betas.iter_mut().zip(&g) {
        b.iter_mut().zip(gj).for_each(|(b, g)| *b -= alpha * g);
    }
    let report = SubgradientReport { g, norm, iteration: state.iteration };
    state.rates = rates;
    state.marginals = marginals;
    state.iteration += 1;
    Ok(report)
}

/// Dual function `D(beta) = sum_j [theta U_j(y_j) - y_j c_j] + sum_j ln Z_j`.
pub fn dual_value(
    betas: &[Vec<f64>],
    theta: f64,
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    utilities: &[Utility],
) -> Result<f64> {
    check_shapes(graph, sets, utilities)?;
    let probe = UmaxState {
        betas: betas.to_vec(),
        rates: Vec::new(),
        marginals: Vec::new(),
        iteration: 0,
        theta,
        step: StepSize::Constant(0.0),
    };
    let mut d = 0.0;
    for j in 0..graph.n_links() {
        let c = probe.incoming_sum(graph, j);
        let y = one_dim_utility_opt(&utilities[j], theta, c);
        d += theta * utilities[j].value(y) - y * c + maxent::log_partition(sets[j].members(), &betas[j]);
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UmaxRecord {
    pub iteration: usize,
    pub rates: Vec<f64>,
    pub subgradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct UmaxRun {
    pub trajectory: Vec<UmaxRecord>,
    pub state: UmaxState,
    /// Rates at the final dual iterate.
    pub final_rates: Vec<f64>,
    /// Global log-fugacities combined from the final iterate; `None` where
    /// the rate sits on `{0, 1}` and the link has neighbors.
    pub final_log_fugacities: Vec<Option<f64>>,
}

/// Iterates [`umax_step`] until the subgradient norm is at most `stop_norm`
/// or `max_iters` steps have run.
pub fn umax_run(
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    utilities: &[Utility],
    theta: f64,
    step: StepSize,
    max_iters: usize,
    stop_norm: f64,
) -> Result<UmaxRun> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    let mut state = umax_init(graph, theta, step)?;
    let mut trajectory = Vec::new();
    for _ in 0..max_iters {
        let rep = umax_step(&mut state, graph, sets, utilities)?;
        trajectory.push(UmaxRecord {
            iteration: rep.iteration,
            rates: state.rates.clone(),
            subgradient_norm: rep.norm,
        });
        if rep.norm <= stop_norm {
            break;
        }
    }
    let final_rates = primal_rates(&state, graph, utilities);
    let final_log_fugacities = (0..graph.n_links())
        .map(|j| {
            let s = final_rates[j];
            let d = graph.degree(j);
            let c = state.incoming_sum(graph, j);
            if d == 1 {
                Some(c)
            } else if s > 0.0 && s < 1.0 {
                Some((d - 1) as f64 * ((1.0 - s).ln() - s.ln()) + c)
            } else {
                None
            }
        })
        .collect();
    Ok(UmaxRun { trajectory, state, final_rates, final_log_fugacities })
}
