//! Closed forms for conflict graphs, evaluated in the log domain.

use serde::{Deserialize, Serialize};

use super::{FugacityVector, LocalFugacities, ServiceRateVector};
use crate::error::{Error, Result};
use crate::topology::InterferenceGraph;

/// Which factorization of the independent-set indicator the global formula
/// comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factorization {
    /// One factor per link covering its whole neighborhood.
    Vertex,
    /// One factor per conflict edge; exact on trees.
    Edge,
}

/// Validates rates and returns `sum_k ln(1 - s_i - s_k)`.
fn pair_log_sum(owner: usize, s_i: f64, neighbors: &[(usize, f64)]) -> Result<f64> {
    if !(s_i > 0.0 && s_i < 1.0) {
        return Err(Error::DegenerateRate { link: owner, rate: s_i });
    }
    let mut acc = 0.0;
    for &(k, s_k) in neighbors {
        if k == owner {
            return Err(Error::SelfLoop(owner));
        }
        if !(s_k > 0.0 && s_k < 1.0) {
            return Err(Error::DegenerateRate { link: k, rate: s_k });
        }
        let slack = 1.0 - s_i - s_k;
        if !(slack > 0.0) {
            return Err(Error::RatePairOverload { link: owner, neighbor: k, sum: s_i + s_k });
        }
        acc += slack.ln();
    }
    Ok(acc)
}

/// Local fugacities at `owner` for a conflict neighborhood.
///
/// `neighbors` lists `(k, s_k)` for `k in N_i \ {i}`.
pub fn conflict_local_fugacities(owner: usize, s_i: f64, neighbors: &[(usize, f64)]) -> Result<LocalFugacities> {
    let pairs = pair_log_sum(owner, s_i, neighbors)?;
    let size = neighbors.len() + 1;
    let mut entries: Vec<(usize, f64)> =
        neighbors.iter().map(|&(k, s_k)| (k, s_k.ln() - (1.0 - s_i - s_k).ln())).collect();
    entries.push((owner, s_i.ln() + (size as f64 - 2.0) * (1.0 - s_i).ln() - pairs));
    entries.sort_by_key(|e| e.0);
    if entries.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidParameter(format!("duplicate neighbor in the neighborhood of link {owner}")));
    }
    let (neighborhood, betas) = entries.into_iter().unzip();
    LocalFugacities::new(owner, neighborhood, betas)
}

/// `ln lambda_i = ln s_i + (2|N_i| - 3) ln(1 - s_i) - 2 sum_k ln(1 - s_i - s_k)`.
pub fn conflict_global_fugacity_vertex(owner: usize, s_i: f64, neighbors: &[(usize, f64)]) -> Result<f64> {
    let pairs = pair_log_sum(owner, s_i, neighbors)?;
    let size = (neighbors.len() + 1) as f64;
    Ok(s_i.ln() + (2.0 * size - 3.0) * (1.0 - s_i).ln() - 2.0 * pairs)
}

/// `ln lambda_i = ln s_i + (|N_i| - 2) ln(1 - s_i) - sum_k ln(1 - s_i - s_k)`.
pub fn conflict_global_fugacity_edge(owner: usize, s_i: f64, neighbors: &[(usize, f64)]) -> Result<f64> {
    let pairs = pair_log_sum(owner, s_i, neighbors)?;
    let size = (neighbors.len() + 1) as f64;
    Ok(s_i.ln() + (size - 2.0) * (1.0 - s_i).ln() - pairs)
}

/// Closed-form global fugacities for every link of a conflict graph.
pub fn conflict_fugacities(
    graph: &InterferenceGraph,
    s: &ServiceRateVector,
    factorization: Factorization,
) -> Result<FugacityVector> {
    if s.len() != graph.n_links() {
        return Err(Error::LengthMismatch { expected: graph.n_links(), actual: s.len() });
    }
    let formula = match factorization {
        Factorization::Vertex => conflict_global_fugacity_vertex,
        Factorization::Edge => conflict_global_fugacity_edge,
    };
    let log = (0..graph.n_links())
        .map(|i| {
            let nbrs: Vec<(usize, f64)> =
                graph.neighborhood(i).iter().filter(|&&k| k != i).map(|&k| (k, s.get(k))).collect();
            formula(i, s.get(i), &nbrs)
        })
        .collect::<Result<Vec<_>>>()?;
    FugacityVector::from_log(log)
}
