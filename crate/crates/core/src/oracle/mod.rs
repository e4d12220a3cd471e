//! Exact ground truth for small networks by exhaustive enumeration of the
//! globally feasible schedules.

mod capacity;
mod optimum;

pub use capacity::{capacity_membership, CapacityMembership, CapacityStatus};
pub use optimum::{utility_optimum_bruteforce, OptimumSettings, UtilityOptimum};

use crate::bethe::{FugacityVector, ServiceRateVector};
use crate::error::{Error, Result};
use crate::maxent::{self, SolverSettings};
use crate::topology::{InterferenceGraph, LinkFeasibility, Network, Schedule};

/// Largest network enumerated exhaustively.
pub const GLOBAL_ENUMERATION_CAP: usize = 24;

/// All globally feasible schedules, as sorted bitmasks (bit `i` is link `i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleScheduleSet {
    n_links: usize,
    masks: Vec<u32>,
}

impl FeasibleScheduleSet {
    /// Builds a set from explicit masks; they are sorted and deduplicated.
    pub fn from_masks(n_links: usize, mut masks: Vec<u32>) -> Result<Self> {
        if n_links > GLOBAL_ENUMERATION_CAP {
            return Err(Error::GlobalEnumerationTooLarge { n_links, cap: GLOBAL_ENUMERATION_CAP });
        }
        if let Some(m) = masks.iter().find(|&&m| (m as u64) >> n_links != 0) {
            return Err(Error::InvalidParameter(format!("schedule {m:#x} uses links beyond {n_links}")));
        }
        masks.sort_unstable();
        masks.dedup();
        Ok(Self { n_links, masks })
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.masks.binary_search(&mask).is_ok()
    }

    pub fn schedules(&self) -> Vec<Schedule> {
        self.masks.iter().map(|&m| Schedule::from_mask(m as u64, self.n_links)).collect()
    }

    /// Whether switching off any active link of any member yields a member.
    pub fn is_subset_closed(&self) -> bool {
        self.masks.iter().all(|&m| {
            let mut bits = m;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                if !self.contains(m & !low) {
                    return false;
                }
                bits &= bits - 1;
            }
            true
        })
    }

    /// One lowercase hex mask per line, preceded by `links <N>`.
    pub fn to_hex(&self) -> String {
        let mut out = format!("links {}\n", self.n_links);
        for m in &self.masks {
            out.push_str(&format!("{m:x}\n"));
        }
        out
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let (ln, head) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty schedule dump".into() })?;
        let n = head
            .strip_prefix("links ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse { line: ln, msg: "expected `links <N>`".into() })?;
        let masks = lines
            .map(|(ln, l)| {
                u32::from_str_radix(l, 16).map_err(|_| Error::Parse { line: ln, msg: format!("bad mask `{l}`") })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(n, masks)
    }
}

/// Every feasible schedule, by depth-first search over links in index order.
///
/// Feasibility is monotone (switching a link off never hurts another), so a
/// branch is pruned as soon as adding a link breaks feasibility.
pub fn enumerate_feasible_schedules(network: &Network, graph: &InterferenceGraph) -> Result<FeasibleScheduleSet> {
    let n = network.n_links();
    if n > GLOBAL_ENUMERATION_CAP {
        return Err(Error::GlobalEnumerationTooLarge { n_links: n, cap: GLOBAL_ENUMERATION_CAP });
    }
    let rule = LinkFeasibility::new(network, graph);
    let mut masks = Vec::new();
    let mut stack = vec![(0usize, 0u32)];
    while let Some((next, mask)) = stack.pop() {
        if next == n {
            masks.push(mask);
            continue;
        }
        stack.push((next + 1, mask));
        if rule.can_activate(graph, next, |k| mask >> k & 1 == 1) {
            stack.push((next + 1, mask | 1 << next));
        }
    }
    FeasibleScheduleSet::from_masks(n, masks)
}

fn mask_weight(mask: u32, log_lambda: &[f64]) -> f64 {
    let mut bits = mask;
    let mut acc = 0.0;
    while bits != 0 {
        acc += log_lambda[bits.trailing_zeros() as usize];
        bits &= bits - 1;
    }
    acc
}

/// `ln Z = ln sum_x prod_i lambda_i^{x_i}`; entries of `log_lambda` may be `-inf`.
pub fn exact_log_partition(log_lambda: &[f64], schedules: &FeasibleScheduleSet) -> f64 {
    let w: Vec<f64> = schedules.masks.iter().map(|&m| mask_weight(m, log_lambda)).collect();
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + w.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Probability of every schedule, aligned with `schedules.masks()`.
pub fn exact_distribution(log_lambda: &[f64], schedules: &FeasibleScheduleSet) -> Vec<f64> {
    let lz = exact_log_partition(log_lambda, schedules);
    schedules.masks.iter().map(|&m| (mask_weight(m, log_lambda) - lz).exp()).collect()
}

/// `P(x_i = 1)` for every link.
pub fn exact_marginals(log_lambda: &[f64], schedules: &FeasibleScheduleSet) -> Vec<f64> {
    let mut s = vec![0.0; schedules.n_links];
    for (&m, p) in schedules.masks.iter().zip(exact_distribution(log_lambda, schedules)) {
        let mut bits = m;
        while bits != 0 {
            s[bits.trailing_zeros() as usize] += p;
            bits &= bits - 1;
        }
    }
    s
}

/// The fugacities whose product-form marginals equal `s`, by maximizing
/// `s . r - ln Z(e^r)`.
pub fn exact_fugacities(
    s: &ServiceRateVector,
    schedules: &FeasibleScheduleSet,
    settings: &SolverSettings,
) -> Result<FugacityVector> {
    if s.len() != schedules.n_links {
        return Err(Error::LengthMismatch { expected: schedules.n_links, actual: s.len() });
    }
    let init = vec![0.0; s.len()];
    let sol = maxent::maximize(&schedules.masks, s.as_slice(), settings, &init)
        .map_err(|e| Error::TargetOutsideCapacityRegion(e.to_string()))?;
    FugacityVector::from_log(sol.params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_interference_graph, complete_network, conflict_network_from_edges, path_network};

    fn schedules(net: &Network) -> FeasibleScheduleSet {
        enumerate_feasible_schedules(net, &build_interference_graph(net)).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(schedules(&complete_network(2).unwrap()).masks(), &[0b00, 0b01, 0b10]);
        assert_eq!(schedules(&path_network(3).unwrap()).masks(), &[0b000, 0b001, 0b010, 0b100, 0b101]);
        let empty = conflict_network_from_edges(3, &[]).unwrap();
        assert_eq!(schedules(&empty).len(), 8);
    }

    #[test]
    fn over_cap_is_rejected() {
        let net = conflict_network_from_edges(25, &[]).unwrap();
        let g = build_interference_graph(&net);
        assert_eq!(
            enumerate_feasible_schedules(&net, &g).unwrap_err(),
            Error::GlobalEnumerationTooLarge { n_links: 25, cap: 24 }
        );
    }

    #[test]
    fn hex_round_trip() {
        let s = schedules(&path_network(4).unwrap());
        assert_eq!(FeasibleScheduleSet::from_hex(&s.to_hex()).unwrap(), s);
        assert!(s.is_subset_closed());
    }

    #[test]
    fn partition_and_marginals() {
        let one = schedules(&path_network(1).unwrap());
        assert!((exact_log_partition(&[0.0], &one) - 2f64.ln()).abs() < 1e-15);
        let two = schedules(&complete_network(2).unwrap());
        let h = 0.5f64.ln();
        assert!((exact_log_partition(&[h, h], &two) - 2f64.ln()).abs() < 1e-15);
        let m = exact_marginals(&[h, h], &two);
        assert!((m[0] - 0.25).abs() < 1e-15 && (m[1] - 0.25).abs() < 1e-15);
        let ninf = f64::NEG_INFINITY;
        assert_eq!(exact_log_partition(&[ninf, ninf], &two), 0.0);
        assert_eq!(exact_marginals(&[ninf, ninf], &two), vec![0.0, 0.0]);
    }

    #[test]
    fn inverse_examples() {
        let st = SolverSettings::default();
        let one = schedules(&path_network(1).unwrap());
        let f = exact_fugacities(&ServiceRateVector::new(vec![0.4]).unwrap(), &one, &st).unwrap();
        assert!((f.lambda(0) - 2.0 / 3.0).abs() < 1e-10);
        let two = schedules(&complete_network(2).unwrap());
        let f = exact_fugacities(&ServiceRateVector::uniform(2, 0.25).unwrap(), &two, &st).unwrap();
        assert!((f.lambda(0) - 0.5).abs() < 1e-10 && (f.lambda(1) - 0.5).abs() < 1e-10);
        assert!(matches!(
            exact_fugacities(&ServiceRateVector::uniform(2, 0.6).unwrap(), &two, &st),
            Err(Error::TargetOutsideCapacityRegion(_))
        ));
    }
}
