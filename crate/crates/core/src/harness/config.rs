use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adaptive::{StepSize, Utility};
use crate::error::{Error, Result};
use crate::topology::{
    build_interference_graph, complete_network, conflict_from_interference, cycle_network, generate_random_network,
    grid_network, path_network, star_network, Network, RadioParams, RandomNetworkConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ErrorVsLoad,
    ErrorVsTime,
    UmaxConvergence,
    SgdCompare,
    StationarityAudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Vertex-centric closed form (conflict graphs).
    BetheVertex,
    /// Edge-centric closed form (conflict graphs).
    BetheEdge,
    /// Local Gibbsian solves plus global combination (any network).
    BetheSinr,
    Sgd1,
    Sgd2,
    ExactOracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::BetheVertex => "bethe_vertex",
            Method::BetheEdge => "bethe_edge",
            Method::BetheSinr => "bethe_sinr",
            Method::Sgd1 => "sgd1",
            Method::Sgd2 => "sgd2",
            Method::ExactOracle => "exact_oracle",
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Method::Sgd1 | Method::Sgd2)
    }
}

fn default_side() -> f64 {
    8.0
}
fn default_length() -> f64 {
    0.5
}
fn default_alpha() -> f64 {
    3.0
}
fn default_radius() -> f64 {
    2.4
}
fn default_threshold_db() -> f64 {
    15.0
}

/// Radio and placement parameters of a random spatial network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n_links: usize,
    pub seed: u64,
    #[serde(default = "default_side")]
    pub plane_side: f64,
    #[serde(default = "default_length")]
    pub link_length: f64,
    #[serde(default = "default_alpha")]
    pub path_loss_exponent: f64,
    #[serde(default = "default_radius")]
    pub close_in_radius: f64,
    #[serde(default = "default_threshold_db")]
    pub sinr_threshold_db: f64,
    #[serde(default)]
    pub noise_power: f64,
}

impl RandomSpec {
    pub fn new(n_links: usize, seed: u64) -> Self {
        Self {
            n_links,
            seed,
            plane_side: default_side(),
            link_length: default_length(),
            path_loss_exponent: default_alpha(),
            close_in_radius: default_radius(),
            sinr_threshold_db: default_threshold_db(),
            noise_power: 0.0,
        }
    }

    fn network(&self) -> Result<Network> {
        let radio = RadioParams::with_threshold_db(
            self.path_loss_exponent,
            self.close_in_radius,
            self.sinr_threshold_db,
            self.noise_power,
        );
        radio.validate()?;
        let cfg = RandomNetworkConfig {
            n_links: self.n_links,
            plane_side: self.plane_side,
            link_length: self.link_length,
            radio,
        };
        generate_random_network(&cfg, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    RandomSinr(RandomSpec),
    /// The interference graph of a random spatial network, used as a
    /// conflict graph.
    RandomConflict(RandomSpec),
    Grid {
        rows: usize,
        cols: usize,
    },
    Complete {
        n: usize,
    },
    Path {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Star {
        n: usize,
    },
    /// A network in the text format of `Network::to_text`.
    NetworkFile {
        path: PathBuf,
    },
}

impl TopologySpec {
    pub fn build(&self) -> Result<Network> {
        match self {
            TopologySpec::RandomSinr(r) => r.network(),
            TopologySpec::RandomConflict(r) => conflict_from_interference(&build_interference_graph(&r.network()?)),
            TopologySpec::Grid { rows, cols } => grid_network(*rows, *cols),
            TopologySpec::Complete { n } => complete_network(*n),
            TopologySpec::Path { n } => path_network(*n),
            TopologySpec::Cycle { n } => cycle_network(*n),
            TopologySpec::Star { n } => star_network(*n),
            TopologySpec::NetworkFile { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Network::from_text(&text)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSpec {
    /// Uniform target rates `start, start + step, ..., stop`.
    Sweep {
        start: f64,
        stop: f64,
        step: f64,
    },
    Uniform {
        rate: f64,
    },
    Fixed {
        rates: Vec<f64>,
    },
}

impl RateSpec {
    /// Sweep points, rounded to 12 decimals so that CSV keys are stable.
    pub fn points(&self) -> Vec<f64> {
        match self {
            RateSpec::Sweep { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
            }
            RateSpec::Uniform { rate } => vec![*rate],
            RateSpec::Fixed { .. } => vec![f64::NAN],
        }
    }

    /// Target vector for one sweep point.
    pub fn targets(&self, point: f64, n: usize) -> Result<Vec<f64>> {
        match self {
            RateSpec::Fixed { rates } if rates.len() == n => Ok(rates.clone()),
            RateSpec::Fixed { rates } => Err(Error::LengthMismatch { expected: n, actual: rates.len() }),
            _ => Ok(vec![point; n]),
        }
    }

    fn validate(&self) -> Result<()> {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        let ok = match self {
            RateSpec::Sweep { start, stop, step } => inside(*start) && inside(*stop) && start <= stop && *step > 0.0,
            RateSpec::Uniform { rate } => inside(*rate),
            RateSpec::Fixed { rates } => !rates.is_empty() && rates.iter().all(|&r| inside(r)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("target rates must lie in (0, 1): {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSpec {
    Harmonic,
    InvSqrt,
    Constant { value: f64 },
}

impl StepSpec {
    pub fn step_size(&self) -> StepSize {
        match self {
            StepSpec::Harmonic => StepSize::Harmonic,
            StepSpec::InvSqrt => StepSize::InvSqrt,
            StepSpec::Constant { value } => StepSize::Constant(*value),
        }
    }
}

fn default_slots() -> u64 {
    1_000_000
}
fn default_theta() -> f64 {
    1.0
}
fn default_max_iters() -> usize {
    200
}
fn default_stop_norm() -> f64 {
    1e-2
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_step() -> StepSpec {
    StepSpec::Harmonic
}
fn default_utility() -> UtilityKind {
    UtilityKind::Log
}

/// One experiment, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_slots")]
    pub slots: u64,
    /// Defaults to a tenth of `slots`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    /// Sampling interval of running errors; defaults to `slots / 100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<u64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_utility")]
    pub utility: UtilityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_step")]
    pub step: StepSpec,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_stop_norm")]
    pub stop_norm: f64,
    /// Stationarity tolerance for audits.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub topology: TopologySpec,
    pub rates: RateSpec,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, topology: TopologySpec, rates: RateSpec) -> Self {
        Self {
            experiment,
            seeds: vec![1],
            methods: vec![Method::BetheSinr],
            slots: default_slots(),
            burn_in: None,
            sample_every: None,
            theta: default_theta(),
            utility: default_utility(),
            weights: None,
            step: default_step(),
            max_iters: default_max_iters(),
            stop_norm: default_stop_norm(),
            tolerance: default_tolerance(),
            output: None,
            topology,
            rates,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.methods.is_empty() && self.experiment != Experiment::UmaxConvergence {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.slots == 0 || self.burn_in.is_some_and(|b| b >= self.slots) {
            return Err(Error::Config("slots must be positive and exceed burn_in".into()));
        }
        if self.sample_every == Some(0) {
            return Err(Error::Config("sample_every must be positive".into()));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Config("theta must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        self.rates.validate()
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in.unwrap_or(self.slots / 10)
    }

    pub fn sample_every(&self) -> u64 {
        self.sample_every.unwrap_or((self.slots / 100).max(1))
    }

    pub fn utilities(&self, n: usize) -> Result<Vec<Utility>> {
        let weights = match &self.weights {
            Some(w) if w.len() == n => w.clone(),
            Some(w) => return Err(Error::LengthMismatch { expected: n, actual: w.len() }),
            None => vec![1.0; n],
        };
        Ok(weights
            .into_iter()
            .map(|w| match self.utility {
                UtilityKind::Log if w == 1.0 => Utility::Log,
                UtilityKind::Log => Utility::WeightedLog(w),
                UtilityKind::Linear => Utility::Linear(w),
            })
            .collect())
    }
}
