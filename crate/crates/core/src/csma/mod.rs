//! Discrete-time CSMA as single-site Glauber dynamics.
//!
//! Each slot one link is drawn uniformly. If switching it on keeps the
//! schedule feasible it becomes active with probability `lambda/(1+lambda)`
//! and idle otherwise; if not, it becomes idle. The chain is reversible with
//! stationary law `p(x) ~ prod_i lambda_i^{x_i} 1(x feasible)`.
//!
//! Randomness comes from ChaCha8 seeded with `ChaCha8Rng::seed_from_u64`.
//! Per slot the chain draws the link with `random_range(0..n)` and then,
//! only when activation is feasible, one `f64` in `[0, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::topology::{InterferenceGraph, LinkFeasibility, Network, Schedule};

/// Fraction of the slots discarded as burn-in by default.
pub const DEFAULT_BURN_IN_FRACTION: f64 = 0.1;

/// Chain state `x(t)`.
#[derive(Debug, Clone)]
pub struct SimState {
    schedule: Schedule,
    slot: u64,
    rng: ChaCha8Rng,
}

impl SimState {
    /// The all-idle schedule at slot 0.
    pub fn new(n_links: usize, seed: u64) -> Self {
        Self { schedule: Schedule::empty(n_links), slot: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }
}

/// `lambda / (1 + lambda)` from `ln lambda`; `-inf` maps to zero.
fn activation_probability(log_lambda: f64) -> f64 {
    if log_lambda >= 0.0 {
        1.0 / (1.0 + (-log_lambda).exp())
    } else {
        let e = log_lambda.exp();
        e / (1.0 + e)
    }
}

/// One slot of the chain; returns the link that was updated.
pub fn glauber_step(
    state: &mut SimState,
    log_lambda: &[f64],
    rule: &LinkFeasibility,
    graph: &InterferenceGraph,
) -> usize {
    update(state, log_lambda, rule, graph).0
}

/// `(link, was_active, is_active)`.
fn update(
    state: &mut SimState,
    log_lambda: &[f64],
    rule: &LinkFeasibility,
    graph: &InterferenceGraph,
) -> (usize, bool, bool) {
    let n = state.schedule.len();
    let i = state.rng.random_range(0..n);
    let was = state.schedule.is_active(i);
    let schedule = &state.schedule;
    let on = rule.can_activate(graph, i, |k| k != i && schedule.is_active(k))
        && state.rng.random::<f64>() < activation_probability(log_lambda[i]);
    state.schedule.set(i, on);
    state.slot += 1;
    debug_assert!(state.schedule.active().all(|j| rule.feasible_at(j, |k| state.schedule.is_active(k))));
    (i, was, on)
}

/// A running chain together with per-link activity counters.
///
/// Counters are kept in O(1) per slot: an active link is charged for its
/// whole run of active slots when it turns off or when counts are read.
#[derive(Debug, Clone)]
pub struct CsmaChain {
    rule: LinkFeasibility,
    graph: InterferenceGraph,
    state: SimState,
    closed: Vec<u64>,
    on_since: Vec<u64>,
}

impl CsmaChain {
    pub fn new(network: &Network, graph: &InterferenceGraph, seed: u64) -> Self {
        let n = network.n_links();
        Self {
            rule: LinkFeasibility::new(network, graph),
            graph: graph.clone(),
            state: SimState::new(n, seed),
            closed: vec![0; n],
            on_since: vec![0; n],
        }
    }

    pub fn n_links(&self) -> usize {
        self.closed.len()
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn slot(&self) -> u64 {
        self.state.slot
    }

    pub fn step(&mut self, log_lambda: &[f64]) {
        let slot = self.state.slot;
        match update(&mut self.state, log_lambda, &self.rule, &self.graph) {
            (i, false, true) => self.on_since[i] = slot,
            (i, true, false) => self.closed[i] += slot - self.on_since[i],
            _ => {}
        }
    }

    pub fn run(&mut self, log_lambda: &[f64], slots: u64) {
        for _ in 0..slots {
            self.step(log_lambda);
        }
    }

    /// Slots `1..=slot()` in which each link was active.
    pub fn active_counts(&self) -> Vec<u64> {
        let now = self.state.slot;
        (0..self.n_links())
            .map(|i| self.closed[i] + if self.state.schedule.is_active(i) { now - self.on_since[i] } else { 0 })
            .collect()
    }
}

/// Achieved service rates over a measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceRateStats {
    pub achieved: Vec<f64>,
    pub active_slots: Vec<u64>,
    pub burn_in: u64,
    pub measured: u64,
}

impl ServiceRateStats {
    /// CSV with header `link_id,target,achieved,active_slots,window`.
    pub fn to_csv(&self, target: &[f64]) -> Result<String> {
        if target.len() != self.achieved.len() {
            return Err(Error::LengthMismatch { expected: self.achieved.len(), actual: target.len() });
        }
        let mut out = String::from("link_id,target,achieved,active_slots,window\n");
        for (i, ((t, a), c)) in target.iter().zip(&self.achieved).zip(&self.active_slots).enumerate() {
            out.push_str(&format!("{i},{t},{a},{c},{}\n", self.measured));
        }
        Ok(out)
    }
}

/// Runs `slots` slots from the idle schedule and measures rates over
/// slots `burn_in + 1 ..= slots`.
pub fn simulate(
    network: &Network,
    graph: &InterferenceGraph,
    log_lambda: &[f64],
    slots: u64,
    burn_in: u64,
    seed: u64,
) -> Result<ServiceRateStats> {
    if log_lambda.len() != network.n_links() {
        return Err(Error::LengthMismatch { expected: network.n_links(), actual: log_lambda.len() });
    }
    if slots <= burn_in {
        return Err(Error::InvalidParameter(format!("slots ({slots}) must exceed burn-in ({burn_in})")));
    }
    let mut chain = CsmaChain::new(network, graph, seed);
    chain.run(log_lambda, burn_in);
    let start = chain.active_counts();
    chain.run(log_lambda, slots - burn_in);
    let measured = slots - burn_in;
    let active_slots: Vec<u64> = chain.active_counts().iter().zip(&start).map(|(a, b)| a - b).collect();
    let achieved = active_slots.iter().map(|&c| c as f64 / measured as f64).collect();
    Ok(ServiceRateStats { achieved, active_slots, burn_in, measured })
}

/// Running Bethe error `e(s(t))` of the cumulative rates since slot 1,
/// sampled every `every` slots and at the last slot.
pub fn simulate_trajectory(
    network: &Network,
    graph: &InterferenceGraph,
    log_lambda: &[f64],
    target: &[f64],
    slots: u64,
    every: u64,
    seed: u64,
) -> Result<Vec<(u64, f64)>> {
    if log_lambda.len() != network.n_links() || target.len() != network.n_links() {
        return Err(Error::LengthMismatch { expected: network.n_links(), actual: log_lambda.len().min(target.len()) });
    }
    if every == 0 || slots == 0 {
        return Err(Error::InvalidParameter("slots and the sampling interval must be positive".into()));
    }
    let mut chain = CsmaChain::new(network, graph, seed);
    let mut out = Vec::new();
    while chain.slot() < slots {
        let chunk = every.min(slots - chain.slot());
        chain.run(log_lambda, chunk);
        out.push((chain.slot(), running_error(&chain, target)));
    }
    Ok(out)
}

pub(crate) fn running_error(chain: &CsmaChain, target: &[f64]) -> f64 {
    let t = chain.slot().max(1) as f64;
    let achieved: Vec<f64> = chain.active_counts().iter().map(|&c| c as f64 / t).collect();
    mean_abs_deviation(target, &achieved)
}

fn mean_abs_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// `e = sum_i |target_i - achieved_i| / N`.
pub fn bethe_error(target: &[f64], achieved: &[f64]) -> Result<f64> {
    if target.len() != achieved.len() {
        return Err(Error::LengthMismatch { expected: target.len(), actual: achieved.len() });
    }
    if target.is_empty() {
        return Err(Error::InvalidParameter("empty rate vectors".into()));
    }
    Ok(mean_abs_deviation(target, achieved))
}
