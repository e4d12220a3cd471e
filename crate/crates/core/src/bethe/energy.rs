use super::{FactorMarginal, FugacityVector, VariableMarginal};
use crate::error::{Error, Result};
use crate::topology::{InterferenceGraph, LocalFeasibleSet};

const CONSISTENCY_TOL: f64 = 1e-9;

fn check_inputs(
    factors: &[FactorMarginal],
    variables: &[VariableMarginal],
    lambda: &FugacityVector,
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
) -> Result<()> {
    let n = graph.n_links();
    for len in [factors.len(), variables.len(), lambda.len(), sets.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, actual: len });
        }
    }
    for (i, v) in variables.iter().enumerate() {
        if v.on < -CONSISTENCY_TOL || v.off < -CONSISTENCY_TOL || (v.on + v.off - 1.0).abs() > CONSISTENCY_TOL {
            return Err(Error::InconsistentMarginals {
                factor: i,
                reason: format!("variable marginal ({}, {}) is not a distribution", v.off, v.on),
            });
        }
    }
    for (i, f) in factors.iter().enumerate() {
        let bad = |reason: String| Err(Error::InconsistentMarginals { factor: i, reason });
        if f.owner != i || f.neighborhood != graph.neighborhood(i) {
            return bad("factor scope differs from the link's neighborhood".into());
        }
        if f.patterns.len() != f.probs.len() {
            return bad("patterns and probabilities have different lengths".into());
        }
        if let Some(p) = f.probs.iter().find(|&&p| !(p >= -CONSISTENCY_TOL)) {
            return bad(format!("negative probability {p}"));
        }
        let total: f64 = f.probs.iter().sum();
        if (total - 1.0).abs() > CONSISTENCY_TOL {
            return bad(format!("probabilities sum to {total}"));
        }
        for (b, m) in f.bit_marginals().into_iter().enumerate() {
            let k = f.neighborhood[b];
            if (m - variables[k].on).abs() > CONSISTENCY_TOL {
                return bad(format!("marginal of link {k} is {m}, variable marginal is {}", variables[k].on));
            }
        }
    }
    Ok(())
}

fn carries_infeasible_mass(f: &FactorMarginal, set: &LocalFeasibleSet) -> bool {
    f.patterns.iter().zip(&f.probs).any(|(&y, &p)| p > 0.0 && !set.contains(y))
}

/// Bethe free energy of the CSMA factor graph,
///
/// ```text
/// F_B = sum_i [ -b_i(1) ln lambda_i - H(b_hat_i) + (d_i - 1) H(b_i) ]
/// ```
///
/// Marginals must be locally consistent. Mass on a pattern outside `I_i`
/// yields `f64::INFINITY`.
pub fn bethe_free_energy(
    factors: &[FactorMarginal],
    variables: &[VariableMarginal],
    lambda: &FugacityVector,
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
) -> Result<f64> {
    check_inputs(factors, variables, lambda, graph, sets)?;
    if factors.iter().zip(sets).any(|(f, s)| carries_infeasible_mass(f, s)) {
        return Ok(f64::INFINITY);
    }
    Ok((0..graph.n_links())
        .map(|i| {
            let d = graph.degree(i) as f64;
            -variables[i].on * lambda.logs()[i] - factors[i].entropy() + (d - 1.0) * variables[i].entropy()
        })
        .sum())
}

/// Terms of `F_B` touched by moving link `i`'s activity, with the move `t`
/// applied: `b_i(1) += t` and, for each `j in N_i`, `t` of mass moves from
/// the empty pattern of `b_hat_j` to the pattern where only `i` is active.
fn local_energy(
    factors: &[FactorMarginal],
    variables: &[VariableMarginal],
    lambda: &FugacityVector,
    graph: &InterferenceGraph,
    moves: &[(usize, usize, usize)],
    i: usize,
    t: f64,
) -> f64 {
    let d = graph.degree(i) as f64;
    let v = VariableMarginal { off: variables[i].off - t, on: variables[i].on + t };
    let mut f = -v.on * lambda.logs()[i] + (d - 1.0) * v.entropy();
    for &(j, empty, single) in moves {
        let mut h = 0.0;
        for (idx, &p) in factors[j].probs.iter().enumerate() {
            let q = if idx == empty {
                p - t
            } else if idx == single {
                p + t
            } else {
                p
            };
            h += super::entropy_term(q);
        }
        f -= h;
    }
    f
}

/// Directional derivative of `F_B` along the consistent move that raises
/// link `i`'s activity, by a fourth-order central difference.
///
/// At a stationary point with `b_i(1)` as the constrained variable this is
/// zero. It needs the empty pattern and the `i`-only pattern in every
/// `b_hat_j`, `j in N_i`, with positive mass.
pub fn bfe_link_derivative(
    factors: &[FactorMarginal],
    variables: &[VariableMarginal],
    lambda: &FugacityVector,
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    i: usize,
) -> Result<f64> {
    check_inputs(factors, variables, lambda, graph, sets)?;
    if i >= graph.n_links() {
        return Err(Error::LinkOutOfRange { index: i, n_links: graph.n_links() });
    }
    let mut moves = Vec::new();
    let mut smallest = variables[i].on.min(variables[i].off);
    for &j in graph.neighborhood(i) {
        let f = &factors[j];
        let bit = f.neighborhood.binary_search(&i).expect("i in N_j") as u32;
        let find = |pattern: u32| {
            f.patterns.iter().position(|&y| y == pattern).ok_or_else(|| Error::InconsistentMarginals {
                factor: j,
                reason: format!("pattern {pattern:#b} missing from the factor marginal"),
            })
        };
        let empty = find(0)?;
        let single = find(1 << bit)?;
        smallest = smallest.min(f.probs[empty]).min(f.probs[single]);
        moves.push((j, empty, single));
    }
    if !(smallest > 0.0) {
        return Err(Error::InvalidParameter(format!("the activity move at link {i} touches a zero-probability entry")));
    }
    let h = 1e-3 * smallest;
    let e = |t: f64| local_energy(factors, variables, lambda, graph, &moves, i, t);
    Ok((-e(2.0 * h) + 8.0 * e(h) - 8.0 * e(-h) + e(-2.0 * h)) / (12.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::{bethe_fugacities, factor_marginal_from_fugacities, ServiceRateVector, SolverSettings};
    use crate::topology::{build_interference_graph, enumerate_all_local_feasible, path_network};

    #[test]
    fn single_link_energy_is_minus_ln_two() {
        let net = path_network(1).unwrap();
        let g = build_interference_graph(&net);
        let sets = enumerate_all_local_feasible(&net, &g).unwrap();
        let f = FactorMarginal { owner: 0, neighborhood: vec![0], patterns: vec![0, 1], probs: vec![0.5, 0.5] };
        let v = VariableMarginal::from_rate(0.5);
        let lam = FugacityVector::from_log(vec![0.0]).unwrap();
        let fb = bethe_free_energy(&[f], &[v], &lam, &g, &sets).unwrap();
        assert!((fb + 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn infeasible_mass_is_infinite_and_inconsistency_is_an_error() {
        let net = crate::topology::complete_network(2).unwrap();
        let g = build_interference_graph(&net);
        let sets = enumerate_all_local_feasible(&net, &g).unwrap();
        let lam = FugacityVector::from_log(vec![0.0, 0.0]).unwrap();
        let f = |owner| FactorMarginal {
            owner,
            neighborhood: vec![0, 1],
            patterns: vec![0b00, 0b01, 0b10, 0b11],
            probs: vec![0.4, 0.2, 0.2, 0.2],
        };
        let v = VariableMarginal::from_rate(0.4);
        assert_eq!(bethe_free_energy(&[f(0), f(1)], &[v, v], &lam, &g, &sets).unwrap(), f64::INFINITY);
        let w = VariableMarginal::from_rate(0.3);
        assert!(matches!(
            bethe_free_energy(&[f(0), f(1)], &[w, w], &lam, &g, &sets),
            Err(Error::InconsistentMarginals { .. })
        ));
    }

    #[test]
    fn derivative_vanishes_at_bethe_point() {
        let net = path_network(4).unwrap();
        let g = build_interference_graph(&net);
        let sets = enumerate_all_local_feasible(&net, &g).unwrap();
        let s = ServiceRateVector::new(vec![0.2, 0.3, 0.25, 0.4]).unwrap();
        let sol = bethe_fugacities(&g, &sets, &s, &SolverSettings::default()).unwrap();
        let factors: Vec<_> =
            sol.locals.iter().zip(&sets).map(|(b, set)| factor_marginal_from_fugacities(b, set).unwrap()).collect();
        let vars: Vec<_> = s.as_slice().iter().map(|&r| VariableMarginal::from_rate(r)).collect();
        for i in 0..4 {
            let d = bfe_link_derivative(&factors, &vars, &sol.fugacities, &g, &sets, i).unwrap();
            assert!(d.abs() < 1e-7, "link {i}: {d}");
        }
        let mut shifted = sol.fugacities.logs().to_vec();
        shifted[2] += 1.5f64.ln();
        let shifted = FugacityVector::from_log(shifted).unwrap();
        let d = bfe_link_derivative(&factors, &vars, &shifted, &g, &sets, 2).unwrap();
        assert!((d + 1.5f64.ln()).abs() < 1e-7);
    }
}
