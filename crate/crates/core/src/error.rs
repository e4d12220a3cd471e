use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit reports.
///
/// Solver failures carry the link they happened at so that experiment
/// drivers can record them as a status instead of aborting a sweep.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conflict adjacency is not symmetric: {0} -> {1} without {1} -> {0}")]
    AsymmetricAdjacency(usize, usize),

    #[error("conflict adjacency has a self loop at link {0}")]
    SelfLoop(usize),

    #[error("adjacency references link {index} but the network has {n_links} links")]
    LinkOutOfRange { index: usize, n_links: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("local enumeration too large at link {link}: |N_i| = {size} exceeds cap {cap}")]
    LocalEnumerationTooLarge { link: usize, size: usize, cap: usize },

    #[error("global enumeration too large: {n_links} links exceeds cap {cap}")]
    GlobalEnumerationTooLarge { n_links: usize, cap: usize },

    #[error("degenerate service rate {rate} at link {link}; rates must lie strictly inside (0, 1)")]
    DegenerateRate { link: usize, rate: f64 },

    #[error("infeasible local rates at link {link}: {reason}")]
    InfeasibleLocalRates { link: usize, reason: String },

    #[error("rate pair overload on conflict edge ({link}, {neighbor}): s_i + s_k = {sum} >= 1")]
    RatePairOverload { link: usize, neighbor: usize, sum: f64 },

    #[error("target outside capacity region: {0}")]
    TargetOutsideCapacityRegion(String),

    #[error("missing local fugacity beta[{neighbor}][{link}] while combining at link {link}")]
    MissingIncoming { link: usize, neighbor: usize },

    #[error("inconsistent marginals at factor {factor}: {reason}")]
    InconsistentMarginals { factor: usize, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in experiment CSV status columns.
    pub fn status(&self) -> &'static str {
        match self {
            Error::AsymmetricAdjacency(..) | Error::SelfLoop(_) | Error::LinkOutOfRange { .. } => "invalid_adjacency",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::LocalEnumerationTooLarge { .. } => "local_enumeration_too_large",
            Error::GlobalEnumerationTooLarge { .. } => "global_enumeration_too_large",
            Error::DegenerateRate { .. } => "degenerate_rate",
            Error::InfeasibleLocalRates { .. } => "infeasible_local_rates",
            Error::RatePairOverload { .. } => "rate_pair_overload",
            Error::TargetOutsideCapacityRegion(_) => "target_outside_capacity_region",
            Error::MissingIncoming { .. } => "missing_incoming",
            Error::InconsistentMarginals { .. } => "inconsistent_marginals",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Parse { .. } => "parse_error",
            Error::Config(_) => "config_error",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
