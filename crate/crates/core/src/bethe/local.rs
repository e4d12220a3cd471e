use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{FactorMarginal, FugacityVector, LocalFugacities, ServiceRateVector};
use crate::error::{Error, Result};
use crate::maxent::{self, MaxEntSolution, SolverSettings};
use crate::topology::{InterferenceGraph, LocalFeasibleSet};

/// A converged local solve together with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolve {
    pub fugacities: LocalFugacities,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub objective_trace: Vec<f64>,
}

/// Starting point of the local solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalInit {
    /// `r = 0`, the uniform distribution over `I_i`.
    Zero,
    /// Independent uniform draws in `[-half_width, half_width]`, seeded per link.
    Uniform { seed: u64, half_width: f64 },
}

impl LocalInit {
    fn point(&self, link: usize, dim: usize) -> Vec<f64> {
        match *self {
            LocalInit::Zero => vec![0.0; dim],
            LocalInit::Uniform { seed, half_width } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (link as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                (0..dim).map(|_| rng.random_range(-half_width..=half_width)).collect()
            }
        }
    }
}

/// Solves the local Gibbsian problem at `set.owner()`.
///
/// `s_local` is aligned with `set.neighborhood()`. The returned `beta`
/// maximizes `sum_k s_k r_k - ln sum_{y in I_i} exp(sum_k y_k r_k)`.
pub fn solve_local_gibbsian(
    set: &LocalFeasibleSet,
    s_local: &[f64],
    settings: &SolverSettings,
) -> Result<LocalFugacities> {
    solve_local_gibbsian_from(set, s_local, settings, &vec![0.0; set.dim()]).map(|s| s.fugacities)
}

pub fn solve_local_gibbsian_from(
    set: &LocalFeasibleSet,
    s_local: &[f64],
    settings: &SolverSettings,
    init: &[f64],
) -> Result<LocalSolve> {
    let owner = set.owner();
    if s_local.len() != set.dim() {
        return Err(Error::LengthMismatch { expected: set.dim(), actual: s_local.len() });
    }
    for (&k, &rate) in set.neighborhood().iter().zip(s_local) {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::DegenerateRate { link: k, rate });
        }
    }
    let MaxEntSolution { params, iterations, gradient_norm, objective_trace } =
        maxent::maximize(set.members(), s_local, settings, init)
            .map_err(|e| Error::InfeasibleLocalRates { link: owner, reason: e.to_string() })?;
    Ok(LocalSolve {
        fugacities: LocalFugacities::new(owner, set.neighborhood().to_vec(), params)?,
        iterations,
        gradient_norm,
        objective_trace,
    })
}

/// `ln lambda_i = (d_i - 1) ln((1 - s_i) / s_i) + sum_{j in N_i} beta_ji`.
///
/// `incoming` maps each `j in N_i` (including `i`) to `beta_ji`. For an
/// isolated link (`d_i = 1`) the rate term vanishes and `s_i` is not used.
pub fn combine_global_fugacity(
    owner: usize,
    s_i: f64,
    neighborhood: &[usize],
    incoming: &BTreeMap<usize, f64>,
) -> Result<f64> {
    let d = neighborhood.len();
    let mut log_lambda = 0.0;
    if d > 1 {
        if !(s_i > 0.0 && s_i < 1.0) {
            return Err(Error::DegenerateRate { link: owner, rate: s_i });
        }
        log_lambda += (d - 1) as f64 * ((1.0 - s_i).ln() - s_i.ln());
    }
    for &j in neighborhood {
        log_lambda += incoming.get(&j).copied().ok_or(Error::MissingIncoming { link: owner, neighbor: j })?;
    }
    Ok(log_lambda)
}

/// `{ j -> beta_ji : j in N_i }` gathered from the neighbors' local fugacities.
pub(crate) fn incoming_betas(i: usize, graph: &InterferenceGraph, locals: &[LocalFugacities]) -> BTreeMap<usize, f64> {
    graph.neighborhood(i).iter().filter_map(|&j| locals.get(j).and_then(|l| l.get(i)).map(|b| (j, b))).collect()
}

/// Global fugacities plus the local solutions they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheSolution {
    pub fugacities: FugacityVector,
    pub locals: Vec<LocalFugacities>,
}

/// Local solve at every link, then the global combination at every link.
pub fn bethe_fugacities(
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    s: &ServiceRateVector,
    settings: &SolverSettings,
) -> Result<BetheSolution> {
    bethe_fugacities_with_init(graph, sets, s, settings, LocalInit::Zero)
}

pub fn bethe_fugacities_with_init(
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    s: &ServiceRateVector,
    settings: &SolverSettings,
    init: LocalInit,
) -> Result<BetheSolution> {
    let n = graph.n_links();
    if sets.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: sets.len() });
    }
    if s.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: s.len() });
    }
    // Solves are independent; results are assembled in link order so the
    // first failing link is reported deterministically.
    let solved: Vec<Result<LocalFugacities>> = sets
        .par_iter()
        .map(|set| {
            let local = s.restrict(set.neighborhood());
            let start = init.point(set.owner(), set.dim());
            solve_local_gibbsian_from(set, &local, settings, &start).map(|r| r.fugacities)
        })
        .collect();
    let locals = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let log = (0..n)
        .map(|i| combine_global_fugacity(i, s.get(i), graph.neighborhood(i), &incoming_betas(i, graph, &locals)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BetheSolution { fugacities: FugacityVector::from_log(log)?, locals })
}

/// `b_i(x) = exp(sum_k x_k beta_ik) / Z_i` over `I_i`.
pub fn factor_marginal_from_fugacities(beta: &LocalFugacities, set: &LocalFeasibleSet) -> Result<FactorMarginal> {
    if beta.neighborhood() != set.neighborhood() {
        return Err(Error::InvalidParameter(format!(
            "local fugacities of link {} do not match the neighborhood of link {}",
            beta.owner(),
            set.owner()
        )));
    }
    Ok(FactorMarginal {
        owner: set.owner(),
        neighborhood: set.neighborhood().to_vec(),
        patterns: set.members().to_vec(),
        probs: maxent::pattern_probabilities(set.members(), beta.betas()),
    })
}
