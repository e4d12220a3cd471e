//! Bethe-approximated fugacities.
//!
//! Every link solves a small concave problem over its own local feasible
//! set (the *local Gibbsian problem*), producing one local fugacity per
//! neighbor. Each link then combines the local fugacities its neighbors hold
//! about it into a global fugacity estimate. The resulting vector is the
//! unique fugacity vector whose Bethe free energy has a stationary point with
//! variable marginals equal to the target service rates;
//! [`check_stationarity`] verifies that property numerically.
//!
//! For conflict graphs the local problem has a closed form, and two different
//! factorizations of the independent-set indicator give two different global
//! formulas ([`conflict_global_fugacity_vertex`] and
//! [`conflict_global_fugacity_edge`]).

mod conflict;
mod energy;
mod local;
mod stationarity;

pub use conflict::{
    conflict_fugacities, conflict_global_fugacity_edge, conflict_global_fugacity_vertex, conflict_local_fugacities,
    Factorization,
};
pub use energy::{bethe_free_energy, bfe_link_derivative};
pub use local::{
    bethe_fugacities, bethe_fugacities_with_init, combine_global_fugacity, factor_marginal_from_fugacities,
    solve_local_gibbsian, solve_local_gibbsian_from, BetheSolution, LocalInit, LocalSolve,
};
pub use stationarity::{check_stationarity, LinkStationarity, StationarityReport};

pub use crate::maxent::{SolverMethod, SolverSettings};

use crate::error::{Error, Result};

/// Per-link service rates, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceRateVector {
    rates: Vec<f64>,
}

impl ServiceRateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        for (link, &rate) in rates.iter().enumerate() {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(Error::DegenerateRate { link, rate });
            }
        }
        Ok(Self { rates })
    }

    pub fn uniform(n: usize, rate: f64) -> Result<Self> {
        Self::new(vec![rate; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.rates[i]
    }

    /// Rates of the links in `neighborhood`, in that order.
    pub fn restrict(&self, neighborhood: &[usize]) -> Vec<f64> {
        neighborhood.iter().map(|&k| self.rates[k]).collect()
    }
}

/// The local fugacities `beta_i = [beta_ik]_{k in N_i}` held by link `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFugacities {
    owner: usize,
    neighborhood: Vec<usize>,
    betas: Vec<f64>,
}

impl LocalFugacities {
    pub fn new(owner: usize, neighborhood: Vec<usize>, betas: Vec<f64>) -> Result<Self> {
        if neighborhood.len() != betas.len() {
            return Err(Error::LengthMismatch { expected: neighborhood.len(), actual: betas.len() });
        }
        if neighborhood.binary_search(&owner).is_err() {
            return Err(Error::InvalidParameter(format!("owner {owner} missing from its neighborhood")));
        }
        if let Some(b) = betas.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite local fugacity {b} at link {owner}")));
        }
        Ok(Self { owner, neighborhood, betas })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn neighborhood(&self) -> &[usize] {
        &self.neighborhood
    }

    /// Log-domain values aligned with [`neighborhood`](Self::neighborhood).
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `beta_ik`, if `k in N_i`.
    pub fn get(&self, k: usize) -> Option<f64> {
        self.neighborhood.binary_search(&k).ok().map(|b| self.betas[b])
    }

    /// CSV rows `owner,neighbor,beta`.
    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.neighborhood.iter().zip(&self.betas).map(move |(k, b)| format!("{},{},{}", self.owner, k, b))
    }
}

/// Writes local fugacities as CSV with header `owner,neighbor,beta`.
pub fn local_fugacities_to_csv(locals: &[LocalFugacities]) -> String {
    let mut out = String::from("owner,neighbor,beta\n");
    for l in locals {
        for row in l.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

/// Global fugacities, stored as `ln lambda_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FugacityVector {
    log: Vec<f64>,
}

impl FugacityVector {
    pub fn from_log(log: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = log.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("log fugacity at link {i} is not finite: {v}")));
        }
        Ok(Self { log })
    }

    pub fn from_linear(lambdas: &[f64]) -> Result<Self> {
        if let Some((i, v)) = lambdas.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::InvalidParameter(format!("fugacity at link {i} must be positive, got {v}")));
        }
        Self::from_log(lambdas.iter().map(|l| l.ln()).collect())
    }

    pub fn logs(&self) -> &[f64] {
        &self.log
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.log[i].exp()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.log.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    /// CSV with header `link_id,log_lambda,lambda`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("link_id,log_lambda,lambda\n");
        for (i, l) in self.log.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i, l, l.exp()));
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output; the `log_lambda` column is authoritative.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut log = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("link_id") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 2 {
                return Err(Error::Parse { line: n + 1, msg: "expected link_id,log_lambda[,lambda]".into() });
            }
            let id: usize =
                cols[0].parse().map_err(|_| Error::Parse { line: n + 1, msg: format!("bad link id `{}`", cols[0]) })?;
            if id != log.len() {
                return Err(Error::Parse { line: n + 1, msg: format!("expected link id {}, got {id}", log.len()) });
            }
            let v: f64 = cols[1]
                .parse()
                .map_err(|_| Error::Parse { line: n + 1, msg: format!("bad log_lambda `{}`", cols[1]) })?;
            log.push(v);
        }
        Self::from_log(log)
    }
}

/// A distribution over local patterns of link `owner`'s neighborhood.
///
/// Patterns are not required to be locally feasible; mass on infeasible
/// patterns makes the Bethe free energy infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMarginal {
    pub owner: usize,
    pub neighborhood: Vec<usize>,
    pub patterns: Vec<u32>,
    pub probs: Vec<f64>,
}

impl FactorMarginal {
    /// `P(x_k = 1)` for each `k` in the neighborhood.
    pub fn bit_marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.neighborhood.len()];
        for (&y, &p) in self.patterns.iter().zip(&self.probs) {
            for (b, slot) in m.iter_mut().enumerate() {
                if y >> b & 1 == 1 {
                    *slot += p;
                }
            }
        }
        m
    }

    pub fn prob(&self, pattern: u32) -> f64 {
        self.patterns.iter().zip(&self.probs).filter(|(&y, _)| y == pattern).map(|(_, p)| p).sum()
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|&p| entropy_term(p)).sum()
    }
}

/// `(b_i(0), b_i(1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableMarginal {
    pub off: f64,
    pub on: f64,
}

impl VariableMarginal {
    pub fn from_rate(rate: f64) -> Self {
        Self { off: 1.0 - rate, on: rate }
    }

    pub fn entropy(&self) -> f64 {
        entropy_term(self.off) + entropy_term(self.on)
    }
}

/// `-p ln p` with `0 ln 0 = 0`.
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}
