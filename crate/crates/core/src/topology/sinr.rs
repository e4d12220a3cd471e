use super::{InterferenceGraph, Link, Network, NetworkModel};
use crate::error::{Error, Result};

/// Received power at `to`'s receiver from `from`'s transmitter.
///
/// Coincident positions give an infinite gain.
pub fn path_gain(from: &Link, to: &Link, path_loss_exponent: f64) -> f64 {
    from.power * from.tx.distance(&to.rx).powf(-path_loss_exponent)
}

/// SINR at the receiver of link `j` when the links in `active` transmit.
///
/// Only links in `N_j \ {j}` contribute interference; anything else in
/// `active` is ignored. Returns `f64::INFINITY` when there is neither noise
/// nor interference.
pub fn compute_sinr(network: &Network, graph: &InterferenceGraph, j: usize, active: &[usize]) -> Result<f64> {
    let radio = network.radio().ok_or_else(|| Error::InvalidParameter("compute_sinr needs an SINR network".into()))?;
    if j >= network.n_links() {
        return Err(Error::LinkOutOfRange { index: j, n_links: network.n_links() });
    }
    let links = network.links();
    let alpha = radio.path_loss_exponent;
    let signal = path_gain(&links[j], &links[j], alpha);
    let interference: f64 = graph
        .neighborhood(j)
        .iter()
        .filter(|&&k| k != j && active.contains(&k))
        .map(|&k| path_gain(&links[k], &links[j], alpha))
        .sum();
    Ok(signal / (radio.noise_power + interference))
}

#[derive(Debug, Clone)]
enum Rule {
    Conflict {
        neighbors: Vec<Vec<usize>>,
    },
    Sinr {
        threshold: f64,
        noise: f64,
        signal: Vec<f64>,
        /// `(k, gain k -> rx_j)` for `k in N_j \ {j}`, ascending `k`.
        interferers: Vec<Vec<(usize, f64)>>,
    },
}

/// Precomputed per-link feasibility rule of a network.
///
/// Evaluates the same quantities as [`compute_sinr`] (same gains, same
/// summation order) without touching geometry on every call.
#[derive(Debug, Clone)]
pub struct LinkFeasibility {
    rule: Rule,
}

impl LinkFeasibility {
    pub fn new(network: &Network, graph: &InterferenceGraph) -> Self {
        let rule = match network.model() {
            NetworkModel::Conflict(adj) => Rule::Conflict { neighbors: adj.clone() },
            NetworkModel::Sinr(radio) => {
                let links = network.links();
                let alpha = radio.path_loss_exponent;
                let signal = links.iter().map(|l| path_gain(l, l, alpha)).collect();
                let interferers = (0..links.len())
                    .map(|j| {
                        graph
                            .neighborhood(j)
                            .iter()
                            .filter(|&&k| k != j)
                            .map(|&k| (k, path_gain(&links[k], &links[j], alpha)))
                            .collect()
                    })
                    .collect();
                Rule::Sinr { threshold: radio.sinr_threshold, noise: radio.noise_power, signal, interferers }
            }
        };
        Self { rule }
    }

    pub fn n_links(&self) -> usize {
        match &self.rule {
            Rule::Conflict { neighbors } => neighbors.len(),
            Rule::Sinr { signal, .. } => signal.len(),
        }
    }

    /// SINR at `j` given the activity of the other links; `None` for conflict networks.
    pub fn sinr_at(&self, j: usize, is_active: impl Fn(usize) -> bool) -> Option<f64> {
        match &self.rule {
            Rule::Conflict { .. } => None,
            Rule::Sinr { noise, signal, interferers, .. } => {
                let interference: f64 = interferers[j].iter().filter(|(k, _)| is_active(*k)).map(|(_, g)| g).sum();
                Some(signal[j] / (noise + interference))
            }
        }
    }

    /// Whether link `j` may be active given the activity of the other links.
    pub fn feasible_at(&self, j: usize, is_active: impl Fn(usize) -> bool) -> bool {
        match &self.rule {
            Rule::Conflict { neighbors } => neighbors[j].iter().all(|&k| !is_active(k)),
            Rule::Sinr { threshold, noise, signal, interferers } => {
                let interference: f64 = interferers[j].iter().filter(|(k, _)| is_active(*k)).map(|(_, g)| g).sum();
                signal[j] / (noise + interference) >= *threshold
            }
        }
    }

    /// Whether switching `i` on keeps every active link (and `i`) feasible.
    ///
    /// `is_active` describes the current schedule; the activity of `i` itself
    /// is taken as on.
    pub fn can_activate(&self, graph: &InterferenceGraph, i: usize, is_active: impl Fn(usize) -> bool) -> bool {
        let with_i = |k: usize| k == i || is_active(k);
        if !self.feasible_at(i, with_i) {
            return false;
        }
        match &self.rule {
            // Symmetric conflicts: i's own check already covers its neighbors.
            Rule::Conflict { .. } => true,
            Rule::Sinr { .. } => {
                graph.neighborhood(i).iter().filter(|&&j| j != i && is_active(j)).all(|&j| self.feasible_at(j, with_i))
            }
        }
    }
}
