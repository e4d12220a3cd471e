use super::{InterferenceGraph, LinkFeasibility, Network, Schedule};
use crate::error::{Error, Result};

/// Largest neighborhood that is enumerated exhaustively.
pub const LOCAL_ENUMERATION_CAP: usize = 22;

/// The locally feasible on/off patterns over `N_i`.
///
/// Patterns are bitmasks whose bit `b` is the activity of
/// `neighborhood[b]`; the neighborhood is sorted ascending and includes the
/// owner at its sorted position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFeasibleSet {
    owner: usize,
    neighborhood: Vec<usize>,
    owner_bit: usize,
    members: Vec<u32>,
}

impl LocalFeasibleSet {
    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn neighborhood(&self) -> &[usize] {
        &self.neighborhood
    }

    /// Bit position of the owner inside a local pattern.
    pub fn owner_bit(&self) -> usize {
        self.owner_bit
    }

    /// Sorted member patterns.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.neighborhood.len()
    }

    pub fn contains(&self, pattern: u32) -> bool {
        self.members.binary_search(&pattern).is_ok()
    }

    /// Bit position of link `k`, if `k in N_i`.
    pub fn bit_of(&self, k: usize) -> Option<usize> {
        self.neighborhood.binary_search(&k).ok()
    }

    /// Restriction of a global schedule to `N_i`.
    pub fn restrict(&self, schedule: &Schedule) -> u32 {
        self.neighborhood.iter().enumerate().fold(0, |m, (b, &k)| m | (schedule.is_active(k) as u32) << b)
    }
}

/// Exact `I_i` for link `i`.
pub fn enumerate_local_feasible(network: &Network, graph: &InterferenceGraph, i: usize) -> Result<LocalFeasibleSet> {
    let rule = LinkFeasibility::new(network, graph);
    enumerate_local_feasible_with(&rule, graph, i, LOCAL_ENUMERATION_CAP)
}

/// `I_i` for every link, sharing one precomputed feasibility rule.
pub fn enumerate_all_local_feasible(network: &Network, graph: &InterferenceGraph) -> Result<Vec<LocalFeasibleSet>> {
    let rule = LinkFeasibility::new(network, graph);
    (0..graph.n_links()).map(|i| enumerate_local_feasible_with(&rule, graph, i, LOCAL_ENUMERATION_CAP)).collect()
}

pub fn enumerate_local_feasible_with(
    rule: &LinkFeasibility,
    graph: &InterferenceGraph,
    i: usize,
    cap: usize,
) -> Result<LocalFeasibleSet> {
    let neighborhood = graph.neighborhood(i).to_vec();
    let d = neighborhood.len();
    if d > cap || d > 31 {
        return Err(Error::LocalEnumerationTooLarge { link: i, size: d, cap });
    }
    let owner_bit = neighborhood.binary_search(&i).expect("i in N_i");
    let owner_mask = 1u32 << owner_bit;
    let members = (0u32..1 << d)
        .filter(|&pattern| {
            pattern & owner_mask == 0
                || rule.feasible_at(i, |k| match neighborhood.binary_search(&k) {
                    Ok(b) => pattern >> b & 1 == 1,
                    Err(_) => false,
                })
        })
        .collect();
    Ok(LocalFeasibleSet { owner: i, neighborhood, owner_bit, members })
}

/// Whether every active link of `x` meets its feasibility rule.
pub fn is_feasible(network: &Network, graph: &InterferenceGraph, x: &Schedule) -> bool {
    let rule = LinkFeasibility::new(network, graph);
    x.active().all(|j| rule.feasible_at(j, |k| x.is_active(k)))
}
