use super::{Network, NetworkModel};

/// Per-link neighborhoods `N_i` of the interference graph.
///
/// `N_i` is sorted ascending and always contains `i`. The relation is
/// symmetric, so `|N_i|` is also the number of factors of the product-form
/// distribution that involve link `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceGraph {
    neighborhoods: Vec<Vec<usize>>,
}

impl InterferenceGraph {
    /// Builds a graph from neighbor lists; `i` is inserted into `N_i` and the
    /// relation is symmetrized by union.
    pub fn from_neighbors(neighbors: &[Vec<usize>]) -> Self {
        let n = neighbors.len();
        let mut sets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for (i, list) in neighbors.iter().enumerate() {
            for &k in list {
                sets[i].push(k);
                sets[k].push(i);
            }
        }
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        Self { neighborhoods: sets }
    }

    pub fn n_links(&self) -> usize {
        self.neighborhoods.len()
    }

    pub fn neighborhood(&self, i: usize) -> &[usize] {
        &self.neighborhoods[i]
    }

    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.neighborhoods
    }

    /// `d_i = |N_i|`.
    pub fn degree(&self, i: usize) -> usize {
        self.neighborhoods[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighborhoods.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighborhoods.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighborhoods[i].binary_search(&j).is_ok()
    }

    /// Checks `i in N_i` and `j in N_i <=> i in N_j`.
    pub fn is_symmetric(&self) -> bool {
        self.neighborhoods
            .iter()
            .enumerate()
            .all(|(i, ns)| ns.binary_search(&i).is_ok() && ns.iter().all(|&j| self.contains(j, i)))
    }

    /// Ordered pairs `(j, k)` with `k in N_j`.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighborhoods.iter().enumerate().flat_map(|(j, ns)| ns.iter().map(move |&k| (j, k)))
    }
}

/// Interference graph of a network.
///
/// SINR networks: `j in N_i` iff `d(tx_j, rx_i) <= R_I` or `d(tx_i, rx_j) <= R_I`.
/// Conflict networks: `N_i = {i} U adjacency(i)`.
pub fn build_interference_graph(network: &Network) -> InterferenceGraph {
    match network.model() {
        NetworkModel::Conflict(adj) => InterferenceGraph::from_neighbors(adj),
        NetworkModel::Sinr(radio) => {
            let links = network.links();
            let n = links.len();
            let mut neighbors = vec![Vec::new(); n];
            for i in 0..n {
                for j in i + 1..n {
                    let in_range = links[j].tx.distance(&links[i].rx) <= radio.close_in_radius
                        || links[i].tx.distance(&links[j].rx) <= radio.close_in_radius;
                    if in_range {
                        neighbors[i].push(j);
                    }
                }
            }
            InterferenceGraph::from_neighbors(&neighbors)
        }
    }
}
