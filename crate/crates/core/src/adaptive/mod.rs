//! Online fugacity adaptation: stochastic-gradient baselines driven by the
//! simulated chain, and the local dual-subgradient utility maximization.

mod umax;
mod utility;

pub use umax::{
    dual_value, umax_init, umax_run, umax_step, StepSize, SubgradientReport, UmaxRecord, UmaxRun, UmaxState,
};
pub use utility::{one_dim_utility_opt, Utility};

use serde::{Deserialize, Serialize};

use crate::bethe::ServiceRateVector;
use crate::csma::{running_error, CsmaChain};
use crate::error::{Error, Result};
use crate::topology::{InterferenceGraph, Network};

/// Step size and window length schedule of the stochastic-gradient updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SgdVariant {
    /// `alpha(j) = 1/((j+2) ln(j+2))`, `T(j) = j + 2`.
    Sgd1,
    /// `alpha(j) = 1/j`, `T(j) = ceil(exp(sqrt j))`.
    Sgd2,
    Fixed {
        step: f64,
        interval: u64,
    },
}

impl SgdVariant {
    pub fn step_size(&self, j: u64) -> f64 {
        let x = j as f64;
        match *self {
            SgdVariant::Sgd1 => 1.0 / ((x + 2.0) * (x + 2.0).ln()),
            SgdVariant::Sgd2 => 1.0 / x,
            SgdVariant::Fixed { step, .. } => step,
        }
    }

    pub fn interval(&self, j: u64) -> u64 {
        match *self {
            SgdVariant::Sgd1 => j + 2,
            SgdVariant::Sgd2 => ((j as f64).sqrt().exp().ceil() as u64).max(1),
            SgdVariant::Fixed { interval, .. } => interval.max(1),
        }
    }
}

/// Initial log-fugacities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SgdInit {
    /// `ln lambda = 0`.
    Zero,
    /// `ln lambda = -20`, fugacities practically zero.
    NearZero,
    Log(Vec<f64>),
}

impl SgdInit {
    fn materialize(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            SgdInit::Zero => Ok(vec![0.0; n]),
            SgdInit::NearZero => Ok(vec![-20.0; n]),
            SgdInit::Log(v) if v.len() == n => Ok(v.clone()),
            SgdInit::Log(v) => Err(Error::LengthMismatch { expected: n, actual: v.len() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdPoint {
    pub slot: u64,
    pub log_lambda: Vec<f64>,
    /// Bethe error of the cumulative rates since slot 1.
    pub running_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdTrajectory {
    pub points: Vec<SgdPoint>,
    pub final_log_lambda: Vec<f64>,
    pub updates: u64,
}

/// Runs the chain for `total_slots` slots, updating
/// `ln lambda_i += alpha(j) (target_i - window_rate_i)` after window `j`.
///
/// A trailing window cut short by `total_slots` produces no update. The
/// trajectory is sampled every `sample_every` slots and at the last slot.
#[allow(clippy::too_many_arguments)]
pub fn sgd_run(
    network: &Network,
    graph: &InterferenceGraph,
    target: &ServiceRateVector,
    variant: SgdVariant,
    total_slots: u64,
    sample_every: u64,
    seed: u64,
    init: &SgdInit,
) -> Result<SgdTrajectory> {
    let n = network.n_links();
    if target.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: target.len() });
    }
    if total_slots < variant.interval(1) {
        return Err(Error::InvalidParameter(format!(
            "total_slots ({total_slots}) is shorter than the first window ({})",
            variant.interval(1)
        )));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be positive".into()));
    }
    let mut log_lambda = init.materialize(n)?;
    let mut chain = CsmaChain::new(network, graph, seed);
    let mut points = Vec::new();
    let mut next_sample = sample_every.min(total_slots);
    let mut j = 1u64;
    while chain.slot() < total_slots {
        let window = variant.interval(j);
        let window_start = chain.slot();
        let end = (window_start + window).min(total_slots);
        let start_counts = chain.active_counts();
        while chain.slot() < end {
            let stop = end.min(next_sample);
            chain.run(&log_lambda, stop - chain.slot());
            if chain.slot() == next_sample {
                points.push(SgdPoint {
                    slot: chain.slot(),
                    log_lambda: log_lambda.clone(),
                    running_error: running_error(&chain, target.as_slice()),
                });
                next_sample = (next_sample + sample_every).min(total_slots);
                if next_sample == chain.slot() {
                    next_sample = u64::MAX;
                }
            }
        }
        if end - window_start == window {
            let alpha = variant.step_size(j);
            let counts = chain.active_counts();
            for i in 0..n {
                let rate = (counts[i] - start_counts[i]) as f64 / window as f64;
                log_lambda[i] += alpha * (target.get(i) - rate);
            }
            j += 1;
        }
    }
    Ok(SgdTrajectory { points, final_log_lambda: log_lambda, updates: j - 1 })
}
