//! Fixtures shared by the benchmarks.

use csma_bethe::harness::{Instance, RandomSpec, TopologySpec};

pub use csma_bethe;

/// A random spatial network with `n` links.
pub fn random_sinr(n: usize, seed: u64) -> Instance {
    Instance::build(&TopologySpec::RandomSinr(RandomSpec::new(n, seed))).expect("random SINR fixture")
}

/// The interference graph of a random spatial network, as a conflict graph.
pub fn random_conflict(n: usize, seed: u64) -> Instance {
    Instance::build(&TopologySpec::RandomConflict(RandomSpec::new(n, seed))).expect("random conflict fixture")
}

pub fn grid(rows: usize, cols: usize) -> Instance {
    Instance::build(&TopologySpec::Grid { rows, cols }).expect("grid fixture")
}

/// A uniform rate that keeps every neighborhood's total load at `load`.
pub fn safe_uniform_rate(inst: &Instance, load: f64) -> f64 {
    let dmax = (0..inst.network.n_links()).map(|i| inst.graph.degree(i)).max().unwrap_or(1);
    load / dmax as f64
}
