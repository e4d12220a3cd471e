//! Network construction, SINR evaluation, interference graphs and local
//! feasible schedule sets.
//!
//! Two kinds of networks are supported:
//!
//! - **SINR spatial** networks, where every link has a transmitter and a
//!   receiver in the plane and a schedule is feasible when every active
//!   receiver sees an SINR of at least the threshold.
//! - **Conflict graph** networks, where a schedule is feasible when the
//!   active links form an independent set of a symmetric adjacency relation.
//!
//! Both kinds produce an [`InterferenceGraph`] whose neighborhoods `N_i`
//! always contain `i`; the feasibility rule at link `i` only ever looks at
//! the activity of links in `N_i`.

mod feasible;
mod graph;
mod io;
mod sinr;

pub use feasible::{
    enumerate_all_local_feasible, enumerate_local_feasible, enumerate_local_feasible_with, is_feasible,
    LocalFeasibleSet, LOCAL_ENUMERATION_CAP,
};
pub use graph::{build_interference_graph, InterferenceGraph};
pub use sinr::{compute_sinr, path_gain, LinkFeasibility};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A transmitter/receiver pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: usize,
    pub tx: Point,
    pub rx: Point,
    /// Transmit power, linear units.
    pub power: f64,
}

/// Physical-layer parameters of an SINR network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub path_loss_exponent: f64,
    /// Interference range; links farther apart than this never interact.
    pub close_in_radius: f64,
    /// Linear SINR threshold (not dB).
    pub sinr_threshold: f64,
    pub noise_power: f64,
}

impl RadioParams {
    /// Builds radio parameters with the threshold given in dB.
    pub fn with_threshold_db(
        path_loss_exponent: f64,
        close_in_radius: f64,
        threshold_db: f64,
        noise_power: f64,
    ) -> Self {
        Self { path_loss_exponent, close_in_radius, sinr_threshold: db_to_linear(threshold_db), noise_power }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.path_loss_exponent > 0.0
            && self.close_in_radius > 0.0
            && self.sinr_threshold > 0.0
            && self.noise_power >= 0.0
            && self.path_loss_exponent.is_finite()
            && self.close_in_radius.is_finite()
            && self.sinr_threshold.is_finite()
            && self.noise_power.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(format!("invalid radio parameters {self:?}")))
        }
    }
}

impl Default for RadioParams {
    /// alpha = 3, R_I = 2.4, T = 15 dB, interference limited.
    fn default() -> Self {
        Self::with_threshold_db(3.0, 2.4, 15.0, 0.0)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    SinrSpatial,
    ConflictGraph,
}

/// How feasibility is decided for a network.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkModel {
    Sinr(RadioParams),
    /// Sorted conflict-neighbor lists, excluding the link itself.
    Conflict(Vec<Vec<usize>>),
}

/// A set of links together with the rule that decides schedule feasibility.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    links: Vec<Link>,
    model: NetworkModel,
}

impl Network {
    /// Builds an SINR network, checking link indices, powers and geometry.
    pub fn sinr(links: Vec<Link>, radio: RadioParams) -> Result<Self> {
        radio.validate()?;
        check_links(&links)?;
        for (i, a) in links.iter().enumerate() {
            if a.tx == a.rx {
                return Err(Error::InvalidNetwork(format!("link {i} has tx == rx")));
            }
            for b in &links[i + 1..] {
                if a.tx == b.tx {
                    return Err(Error::InvalidNetwork(format!(
                        "links {} and {} share a transmitter position",
                        a.id, b.id
                    )));
                }
            }
        }
        Ok(Self { links, model: NetworkModel::Sinr(radio) })
    }

    /// Builds a conflict-graph network over the given links and neighbor lists.
    pub fn conflict(links: Vec<Link>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        check_links(&links)?;
        if neighbors.len() != links.len() {
            return Err(Error::LengthMismatch { expected: links.len(), actual: neighbors.len() });
        }
        let n = links.len();
        let mut lists = neighbors;
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &k in list.iter() {
                if k >= n {
                    return Err(Error::LinkOutOfRange { index: k, n_links: n });
                }
                if k == i {
                    return Err(Error::SelfLoop(i));
                }
            }
        }
        for (i, list) in lists.iter().enumerate() {
            for &k in list {
                if lists[k].binary_search(&i).is_err() {
                    return Err(Error::AsymmetricAdjacency(i, k));
                }
            }
        }
        Ok(Self { links, model: NetworkModel::Conflict(lists) })
    }

    pub fn kind(&self) -> NetworkKind {
        match self.model {
            NetworkModel::Sinr(_) => NetworkKind::SinrSpatial,
            NetworkModel::Conflict(_) => NetworkKind::ConflictGraph,
        }
    }

    pub fn model(&self) -> &NetworkModel {
        &self.model
    }

    pub fn radio(&self) -> Option<&RadioParams> {
        match &self.model {
            NetworkModel::Sinr(r) => Some(r),
            NetworkModel::Conflict(_) => None,
        }
    }

    /// Conflict neighbors of each link (excluding itself), for conflict-graph networks.
    pub fn conflict_neighbors(&self) -> Option<&[Vec<usize>]> {
        match &self.model {
            NetworkModel::Conflict(adj) => Some(adj),
            NetworkModel::Sinr(_) => None,
        }
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    /// Edge list `(i, j)` with `i < j` of a conflict-graph network.
    pub fn conflict_edges(&self) -> Vec<(usize, usize)> {
        match &self.model {
            NetworkModel::Conflict(adj) => adj
                .iter()
                .enumerate()
                .flat_map(|(i, l)| l.iter().filter(move |&&k| k > i).map(move |&k| (i, k)))
                .collect(),
            NetworkModel::Sinr(_) => Vec::new(),
        }
    }
}

fn check_links(links: &[Link]) -> Result<()> {
    for (i, l) in links.iter().enumerate() {
        if l.id != i {
            return Err(Error::InvalidNetwork(format!(
                "link ids must be contiguous from 0: position {i} has id {}",
                l.id
            )));
        }
        if !(l.power > 0.0 && l.power.is_finite()) {
            return Err(Error::InvalidNetwork(format!("link {i} has non-positive power {}", l.power)));
        }
        let coords = [l.tx.x, l.tx.y, l.rx.x, l.rx.y];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidNetwork(format!("link {i} has a non-finite coordinate")));
        }
    }
    Ok(())
}

/// Parameters of the uniform random spatial network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomNetworkConfig {
    pub n_links: usize,
    pub plane_side: f64,
    pub link_length: f64,
    pub radio: RadioParams,
}

impl Default for RandomNetworkConfig {
    fn default() -> Self {
        Self { n_links: 20, plane_side: 8.0, link_length: 0.5, radio: RadioParams::default() }
    }
}

/// Places transmitters uniformly on `[0, side]^2` and each receiver at
/// `link_length` in a uniformly random direction. Unit transmit power.
pub fn generate_random_network(cfg: &RandomNetworkConfig, seed: u64) -> Result<Network> {
    if cfg.n_links == 0 {
        return Err(Error::InvalidParameter("n_links must be at least 1".into()));
    }
    if !(cfg.plane_side > 0.0) || !(cfg.link_length > 0.0) {
        return Err(Error::InvalidParameter("plane_side and link_length must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links: Vec<Link> = Vec::with_capacity(cfg.n_links);
    while links.len() < cfg.n_links {
        let tx = Point::new(rng.random::<f64>() * cfg.plane_side, rng.random::<f64>() * cfg.plane_side);
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        // Resample on the (measure zero) event of a shared transmitter position.
        if links.iter().any(|l| l.tx == tx) {
            continue;
        }
        let rx = Point::new(tx.x + cfg.link_length * angle.cos(), tx.y + cfg.link_length * angle.sin());
        links.push(Link { id: links.len(), tx, rx, power: 1.0 });
    }
    Network::sinr(links, cfg.radio)
}

/// Builds a conflict-graph network from a boolean adjacency matrix.
pub fn build_conflict_graph_network(adjacency: &[Vec<bool>]) -> Result<Network> {
    let n = adjacency.len();
    let mut neighbors = vec![Vec::new(); n];
    for (i, row) in adjacency.iter().enumerate() {
        if row.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: row.len() });
        }
        for (j, &on) in row.iter().enumerate() {
            if !on {
                continue;
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !adjacency[j][i] {
                return Err(Error::AsymmetricAdjacency(i, j));
            }
            neighbors[i].push(j);
        }
    }
    Network::conflict(placeholder_links(n), neighbors)
}

/// Conflict-graph network from an undirected edge list.
pub fn conflict_network_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Network> {
    let mut neighbors = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::LinkOutOfRange { index: a.max(b), n_links: n });
        }
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    Network::conflict(placeholder_links(n), neighbors)
}

/// `rows x cols` grid with 4-neighbor conflicts; link `r * cols + c`.
pub fn grid_network(rows: usize, cols: usize) -> Result<Network> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                edges.push((i, i + 1));
            }
            if r + 1 < rows {
                edges.push((i, i + cols));
            }
        }
    }
    let mut net = conflict_network_from_edges(rows * cols, &edges)?;
    for (i, l) in net.links.iter_mut().enumerate() {
        let p = Point::new((i % cols) as f64, (i / cols) as f64);
        l.tx = p;
        l.rx = p;
    }
    Ok(net)
}

pub fn complete_network(n: usize) -> Result<Network> {
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    conflict_network_from_edges(n, &edges)
}

pub fn path_network(n: usize) -> Result<Network> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    conflict_network_from_edges(n, &edges)
}

pub fn cycle_network(n: usize) -> Result<Network> {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    if n > 2 {
        edges.push((n - 1, 0));
    }
    conflict_network_from_edges(n, &edges)
}

/// Star with center 0 and `n - 1` leaves.
pub fn star_network(n: usize) -> Result<Network> {
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    conflict_network_from_edges(n, &edges)
}

/// Conflict network whose adjacency is the interference graph of `network`.
pub fn conflict_from_interference(graph: &InterferenceGraph) -> Result<Network> {
    let neighbors =
        (0..graph.n_links()).map(|i| graph.neighborhood(i).iter().copied().filter(|&k| k != i).collect()).collect();
    Network::conflict(placeholder_links(graph.n_links()), neighbors)
}

fn placeholder_links(n: usize) -> Vec<Link> {
    (0..n)
        .map(|i| {
            let p = Point::new(i as f64, 0.0);
            Link { id: i, tx: p, rx: p, power: 1.0 }
        })
        .collect()
}

/// A global on/off assignment; `bits[i]` is the activity of link `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Schedule {
    bits: Vec<bool>,
}

impl Schedule {
    pub fn empty(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Bit `i` of `mask` is link `i`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self { bits: (0..n).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn from_active(n: usize, active: &[usize]) -> Self {
        let mut s = Self::empty(n);
        for &i in active {
            s.bits[i] = true;
        }
        s
    }

    pub fn to_mask(&self) -> u64 {
        assert!(self.bits.len() <= 64, "schedule too long for a u64 mask");
        self.bits.iter().enumerate().fold(0, |m, (i, &b)| m | (b as u64) << i)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, on: bool) {
        self.bits[i] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}
