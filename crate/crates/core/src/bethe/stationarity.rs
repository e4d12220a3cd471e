use super::local::incoming_betas;
use super::{
    bfe_link_derivative, combine_global_fugacity, factor_marginal_from_fugacities, solve_local_gibbsian,
    FugacityVector, LocalFugacities, ServiceRateVector, SolverSettings, VariableMarginal,
};
use crate::topology::{InterferenceGraph, LocalFeasibleSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LinkStationarity {
    pub link: usize,
    /// `max_k |b_hat_i(x_k = 1) - s_k|` over `k in N_i`.
    pub max_entropy_residual: f64,
    /// `|ln lambda_i - combine_i|`.
    pub fugacity_residual: f64,
    /// `|dF_B|` along the activity move of link `i`; `NaN` if not computable.
    pub bfe_gradient_residual: f64,
    /// Set when the local solve failed; residuals are then infinite.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub links: Vec<LinkStationarity>,
    pub max_entropy_residual: f64,
    pub fugacity_residual: f64,
    pub bfe_gradient_residual: f64,
    /// Both the max-entropy and the fugacity conditions hold within `tol`.
    pub pass: bool,
}

/// Checks that `lambda` is the Bethe fugacity vector for `s`.
///
/// The max-entropy condition re-solves every local problem and compares the
/// reconstructed factor marginals with `s`; the fugacity condition compares
/// `lambda` with the combination of those local fugacities. The directional
/// derivative of the Bethe free energy is reported as a second, independent
/// view of the fugacity condition.
pub fn check_stationarity(
    graph: &InterferenceGraph,
    sets: &[LocalFeasibleSet],
    s: &ServiceRateVector,
    lambda: &FugacityVector,
    settings: &SolverSettings,
    tol: f64,
) -> StationarityReport {
    let n = graph.n_links();
    let shape_ok = sets.len() == n && s.len() == n && lambda.len() == n;
    let solved: Vec<Result<LocalFugacities, String>> = if shape_ok {
        sets.iter()
            .map(|set| solve_local_gibbsian(set, &s.restrict(set.neighborhood()), settings).map_err(|e| e.to_string()))
            .collect()
    } else {
        vec![Err("length mismatch between graph, sets, rates and fugacities".into()); n]
    };

    let all_ok = solved.iter().all(|r| r.is_ok());
    let locals: Vec<LocalFugacities> = solved.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    let factors: Option<Vec<_>> = all_ok
        .then(|| {
            locals
                .iter()
                .zip(sets)
                .map(|(b, set)| factor_marginal_from_fugacities(b, set))
                .collect::<Result<Vec<_>, _>>()
                .ok()
        })
        .flatten();
    let variables: Vec<VariableMarginal> = (0..s.len()).map(|i| VariableMarginal::from_rate(s.get(i))).collect();

    let mut links = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = LinkStationarity {
            link: i,
            max_entropy_residual: f64::INFINITY,
            fugacity_residual: f64::INFINITY,
            bfe_gradient_residual: f64::NAN,
            error: None,
        };
        match &solved[i] {
            Err(e) => row.error = Some(e.clone()),
            Ok(beta) => {
                let set = &sets[i];
                if let Ok(fm) = factor_marginal_from_fugacities(beta, set) {
                    row.max_entropy_residual = fm
                        .bit_marginals()
                        .iter()
                        .zip(set.neighborhood())
                        .map(|(m, &k)| (m - s.get(k)).abs())
                        .fold(0.0, f64::max);
                }
            }
        }
        if all_ok {
            match combine_global_fugacity(i, s.get(i), graph.neighborhood(i), &incoming_betas(i, graph, &locals)) {
                Ok(c) => row.fugacity_residual = (lambda.logs()[i] - c).abs(),
                Err(e) => row.error = Some(e.to_string()),
            }
            if let Some(f) = &factors {
                if let Ok(d) = bfe_link_derivative(f, &variables, lambda, graph, sets, i) {
                    row.bfe_gradient_residual = d.abs();
                }
            }
        } else if row.error.is_none() {
            row.error = Some("a neighboring local solve failed".into());
        }
        links.push(row);
    }

    let max_of = |f: fn(&LinkStationarity) -> f64| {
        links.iter().map(f).fold(0.0, |a: f64, b| if b.is_nan() { a } else { a.max(b) })
    };
    let max_entropy_residual = max_of(|l| l.max_entropy_residual);
    let fugacity_residual = max_of(|l| l.fugacity_residual);
    let bfe_gradient_residual = if links.iter().any(|l| l.bfe_gradient_residual.is_nan()) {
        f64::NAN
    } else {
        max_of(|l| l.bfe_gradient_residual)
    };
    let pass = shape_ok && all_ok && max_entropy_residual <= tol && fugacity_residual <= tol;
    StationarityReport { links, max_entropy_residual, fugacity_residual, bfe_gradient_residual, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::{bethe_fugacities, conflict_fugacities, Factorization};
    use crate::topology::{build_interference_graph, cycle_network, enumerate_all_local_feasible, Network};

    fn setup(net: &Network) -> (InterferenceGraph, Vec<LocalFeasibleSet>) {
        let g = build_interference_graph(net);
        let sets = enumerate_all_local_feasible(net, &g).unwrap();
        (g, sets)
    }

    #[test]
    fn bethe_output_passes_and_perturbation_fails() {
        let (g, sets) = setup(&cycle_network(4).unwrap());
        let s = ServiceRateVector::new(vec![0.2, 0.3, 0.15, 0.25]).unwrap();
        let st = SolverSettings::default();
        let sol = bethe_fugacities(&g, &sets, &s, &st).unwrap();
        let rep = check_stationarity(&g, &sets, &s, &sol.fugacities, &st, 1e-6);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.bfe_gradient_residual < 1e-6);

        let mut logs = sol.fugacities.logs().to_vec();
        logs[1] += 1.5f64.ln();
        let rep = check_stationarity(&g, &sets, &s, &FugacityVector::from_log(logs).unwrap(), &st, 1e-6);
        assert!(!rep.pass);
        assert!((rep.fugacity_residual - 1.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn edge_formula_fails_on_a_cycle() {
        let (g, sets) = setup(&cycle_network(4).unwrap());
        let s = ServiceRateVector::uniform(4, 0.2).unwrap();
        let edge = conflict_fugacities(&g, &s, Factorization::Edge).unwrap();
        assert!(!check_stationarity(&g, &sets, &s, &edge, &SolverSettings::default(), 1e-6).pass);
    }
}
