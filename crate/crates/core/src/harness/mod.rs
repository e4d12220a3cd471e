//! Experiment orchestration and CSV output.
//!
//! Every CSV starts with a `# schema: <tag>` comment line followed by the
//! column header. Rows are sorted by seed and then by the experiment's
//! primary key, so output is byte-identical for identical configurations.

mod config;

pub use config::{Experiment, ExperimentConfig, Method, RandomSpec, RateSpec, StepSpec, TopologySpec, UtilityKind};

use rayon::prelude::*;

use crate::adaptive::{sgd_run, umax_run, SgdInit, SgdVariant};
use crate::bethe::{
    bethe_fugacities, check_stationarity, conflict_fugacities, Factorization, FugacityVector, ServiceRateVector,
    SolverSettings,
};
use crate::csma::{bethe_error, simulate, simulate_trajectory};
use crate::error::{Error, Result};
use crate::oracle::{enumerate_feasible_schedules, exact_fugacities};
use crate::topology::{
    build_interference_graph, enumerate_all_local_feasible, InterferenceGraph, LocalFeasibleSet, Network, NetworkKind,
};

pub const ERROR_VS_LOAD_SCHEMA: &str = "csma-bethe/error_vs_load/v1";
pub const ERROR_VS_TIME_SCHEMA: &str = "csma-bethe/error_vs_time/v1";
pub const SGD_COMPARE_SCHEMA: &str = "csma-bethe/sgd_compare/v1";
pub const UMAX_TRAJECTORY_SCHEMA: &str = "csma-bethe/umax_trajectory/v1";
pub const UMAX_FUGACITY_SCHEMA: &str = "csma-bethe/umax_fugacities/v1";
pub const AUDIT_SCHEMA: &str = "csma-bethe/stationarity_audit/v1";

/// A named CSV produced by an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFile {
    /// File-name suffix; empty for the main output.
    pub suffix: String,
    pub contents: String,
}

fn csv(schema: &str, header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("# schema: {schema}\n{header}\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Network, interference graph and local feasible sets of an experiment.
pub struct Instance {
    pub network: Network,
    pub graph: InterferenceGraph,
    pub sets: Vec<LocalFeasibleSet>,
}

impl Instance {
    pub fn build(spec: &TopologySpec) -> Result<Self> {
        Self::from_network(spec.build()?)
    }

    pub fn from_network(network: Network) -> Result<Self> {
        let graph = build_interference_graph(&network);
        let sets = enumerate_all_local_feasible(&network, &graph)?;
        Ok(Self { network, graph, sets })
    }
}

/// Static fugacities of a non-adaptive method.
pub fn static_fugacities(inst: &Instance, method: Method, target: &[f64]) -> Result<FugacityVector> {
    let s = ServiceRateVector::new(target.to_vec())?;
    let settings = SolverSettings::default();
    match method {
        Method::BetheVertex | Method::BetheEdge => {
            if inst.network.kind() != NetworkKind::ConflictGraph {
                return Err(Error::InvalidParameter(format!("{} needs a conflict-graph network", method.name())));
            }
            let f = if method == Method::BetheVertex { Factorization::Vertex } else { Factorization::Edge };
            conflict_fugacities(&inst.graph, &s, f)
        }
        Method::BetheSinr => Ok(bethe_fugacities(&inst.graph, &inst.sets, &s, &settings)?.fugacities),
        Method::ExactOracle => {
            let schedules = enumerate_feasible_schedules(&inst.network, &inst.graph)?;
            exact_fugacities(&s, &schedules, &settings)
        }
        Method::Sgd1 | Method::Sgd2 => {
            Err(Error::InvalidParameter(format!("{} is adaptive and has no static fugacities", method.name())))
        }
    }
}

fn sgd_variant(method: Method) -> SgdVariant {
    if method == Method::Sgd1 {
        SgdVariant::Sgd1
    } else {
        SgdVariant::Sgd2
    }
}

fn fmt_err(e: &Error) -> (String, &'static str) {
    ("NaN".into(), e.status())
}

/// Runs the experiment named in `cfg` and returns its CSV files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CsvFile>> {
    cfg.validate()?;
    let main = |contents| vec![CsvFile { suffix: String::new(), contents }];
    match cfg.experiment {
        Experiment::ErrorVsLoad => run_error_vs_load(cfg).map(main),
        Experiment::ErrorVsTime => run_error_vs_time(cfg).map(main),
        Experiment::SgdCompare => run_sgd_compare(cfg).map(main),
        Experiment::StationarityAudit => run_stationarity_audit(cfg).map(main),
        Experiment::UmaxConvergence => {
            let (traj, fug) = run_umax(cfg)?;
            Ok(vec![
                CsvFile { suffix: String::new(), contents: traj },
                CsvFile { suffix: "fugacities".into(), contents: fug },
            ])
        }
    }
}

/// Writes the files of [`run_experiment`]; extra files get `_<suffix>`
/// inserted before the extension of `path`.
pub fn write_outputs(path: &std::path::Path, files: &[CsvFile]) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for f in files {
        let target = if f.suffix.is_empty() {
            path.to_path_buf()
        } else {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
            path.with_file_name(format!("{stem}_{}{ext}", f.suffix))
        };
        if let Some(dir) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&target, &f.contents)?;
        written.push(target);
    }
    Ok(written)
}

/// Rows `rate,method,seed,bethe_error,status`.
///
/// Static methods are simulated for `slots` slots with burn-in; adaptive
/// methods report the running error of their own trajectory at the end.
pub fn run_error_vs_load(cfg: &ExperimentConfig) -> Result<String> {
    let inst = Instance::build(&cfg.topology)?;
    let n = inst.network.n_links();
    let points = cfg.rates.points();
    let mut cells = Vec::new();
    for &seed in &cfg.seeds {
        for (p, &point) in points.iter().enumerate() {
            for &method in &cfg.methods {
                cells.push((seed, p, point, method));
            }
        }
    }
    let rows: Vec<((u64, usize, Method), String)> = cells
        .par_iter()
        .map(|&(seed, p, point, method)| {
            let outcome = cfg.rates.targets(point, n).and_then(|target| {
                if method.is_adaptive() {
                    let t = ServiceRateVector::new(target)?;
                    let run = sgd_run(
                        &inst.network,
                        &inst.graph,
                        &t,
                        sgd_variant(method),
                        cfg.slots,
                        cfg.slots,
                        seed,
                        &SgdInit::Zero,
                    )?;
                    Ok(run.points.last().map_or(f64::NAN, |q| q.running_error))
                } else {
                    let f = static_fugacities(&inst, method, &target)?;
                    let stats = simulate(&inst.network, &inst.graph, f.logs(), cfg.slots, cfg.burn_in(), seed)?;
                    bethe_error(&target, &stats.achieved)
                }
            });
            let (err, status) = match outcome {
                Ok(e) => (e.to_string(), "ok"),
                Err(e) => fmt_err(&e),
            };
            ((seed, p, method), format!("{},{},{},{},{}", rate_key(point), method.name(), seed, err, status))
        })
        .collect();
    Ok(csv(ERROR_VS_LOAD_SCHEMA, "rate,method,seed,bethe_error,status", sorted(rows)))
}

fn rate_key(point: f64) -> String {
    if point.is_nan() {
        "fixed".into()
    } else {
        point.to_string()
    }
}

fn sorted<K: Ord>(mut rows: Vec<(K, String)>) -> Vec<String> {
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows.into_iter().map(|(_, r)| r).collect()
}

fn single_target(cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>> {
    let points = cfg.rates.points();
    if points.len() != 1 {
        return Err(Error::Config("this experiment needs a single target (uniform or fixed rates)".into()));
    }
    cfg.rates.targets(points[0], n)
}

/// Running-error trajectory of one method: `(slot, error)` samples.
fn trajectory(
    inst: &Instance,
    cfg: &ExperimentConfig,
    method: Method,
    target: &[f64],
    seed: u64,
) -> Result<Vec<(u64, f64)>> {
    if method.is_adaptive() {
        let t = ServiceRateVector::new(target.to_vec())?;
        let run = sgd_run(
            &inst.network,
            &inst.graph,
            &t,
            sgd_variant(method),
            cfg.slots,
            cfg.sample_every(),
            seed,
            &SgdInit::Zero,
        )?;
        Ok(run.points.iter().map(|p| (p.slot, p.running_error)).collect())
    } else {
        let f = static_fugacities(inst, method, target)?;
        simulate_trajectory(&inst.network, &inst.graph, f.logs(), target, cfg.slots, cfg.sample_every(), seed)
    }
}

type Trajectory = Result<Vec<(u64, f64)>>;

fn method_trajectories(cfg: &ExperimentConfig) -> Result<Vec<((u64, Method), Trajectory)>> {
    let inst = Instance::build(&cfg.topology)?;
    let target = single_target(cfg, inst.network.n_links())?;
    let cells: Vec<(u64, Method)> = cfg.seeds.iter().flat_map(|&s| cfg.methods.iter().map(move |&m| (s, m))).collect();
    Ok(cells.par_iter().map(|&(seed, m)| ((seed, m), trajectory(&inst, cfg, m, &target, seed))).collect())
}

/// Rows `slot,method,seed,running_error,status`; the running error uses
/// cumulative rates since slot 1. A failed method yields one row at slot 0.
pub fn run_error_vs_time(cfg: &ExperimentConfig) -> Result<String> {
    let mut rows = Vec::new();
    for ((seed, method), traj) in method_trajectories(cfg)? {
        match traj {
            Ok(points) => {
                for (slot, e) in points {
                    rows.push(((seed, slot, method), format!("{slot},{},{seed},{e},ok", method.name())));
                }
            }
            Err(e) => {
                let (v, status) = fmt_err(&e);
                rows.push(((seed, 0, method), format!("0,{},{seed},{v},{status}", method.name())));
            }
        }
    }
    Ok(csv(ERROR_VS_TIME_SCHEMA, "slot,method,seed,running_error,status", sorted(rows)))
}

/// Rows `method,seed,final_running_error,status`.
pub fn run_sgd_compare(cfg: &ExperimentConfig) -> Result<String> {
    let rows = method_trajectories(cfg)?
        .into_iter()
        .map(|((seed, method), traj)| {
            let (v, status) = match traj.map(|p| p.last().map_or(f64::NAN, |x| x.1)) {
                Ok(e) => (e.to_string(), "ok"),
                Err(e) => fmt_err(&e),
            };
            ((seed, method), format!("{},{seed},{v},{status}", method.name()))
        })
        .collect();
    Ok(csv(SGD_COMPARE_SCHEMA, "method,seed,final_running_error,status", sorted(rows)))
}

/// Trajectory rows `iteration,subgradient_norm,rate_0..` and final rows
/// `link_id,rate,log_lambda,status`.
pub fn run_umax(cfg: &ExperimentConfig) -> Result<(String, String)> {
    let inst = Instance::build(&cfg.topology)?;
    let n = inst.network.n_links();
    let utilities = cfg.utilities(n)?;
    let run =
        umax_run(&inst.graph, &inst.sets, &utilities, cfg.theta, cfg.step.step_size(), cfg.max_iters, cfg.stop_norm)?;
    let header = std::iter::once("iteration,subgradient_norm".to_string())
        .chain((0..n).map(|i| format!("rate_{i}")))
        .collect::<Vec<_>>()
        .join(",");
    let traj = run.trajectory.iter().map(|r| {
        let mut row = format!("{},{}", r.iteration, r.subgradient_norm);
        for s in &r.rates {
            row.push_str(&format!(",{s}"));
        }
        row
    });
    let fug = (0..n).map(|i| match run.final_log_fugacities[i] {
        Some(l) => format!("{i},{},{l},ok", run.final_rates[i]),
        None => format!("{i},{},NaN,boundary_rate", run.final_rates[i]),
    });
    Ok((csv(UMAX_TRAJECTORY_SCHEMA, &header, traj), csv(UMAX_FUGACITY_SCHEMA, "link_id,rate,log_lambda,status", fug)))
}

/// Rows `rate,method,link,max_entropy_residual,fugacity_residual,bfe_gradient_residual,pass,status`.
pub fn run_stationarity_audit(cfg: &ExperimentConfig) -> Result<String> {
    let inst = Instance::build(&cfg.topology)?;
    let n = inst.network.n_links();
    let settings = SolverSettings::default();
    let mut rows = Vec::new();
    for (p, point) in cfg.rates.points().into_iter().enumerate() {
        for &method in cfg.methods.iter().filter(|m| !m.is_adaptive()) {
            let key = rate_key(point);
            let outcome = cfg.rates.targets(point, n).and_then(|target| {
                let f = static_fugacities(&inst, method, &target)?;
                let s = ServiceRateVector::new(target)?;
                Ok(check_stationarity(&inst.graph, &inst.sets, &s, &f, &settings, cfg.tolerance))
            });
            match outcome {
                Ok(rep) => {
                    for l in &rep.links {
                        let ok = l.max_entropy_residual <= cfg.tolerance && l.fugacity_residual <= cfg.tolerance;
                        let status = if l.error.is_some() { "local_solve_failed" } else { "ok" };
                        rows.push((
                            (p, method, l.link),
                            format!(
                                "{key},{},{},{:e},{:e},{:e},{ok},{status}",
                                method.name(),
                                l.link,
                                l.max_entropy_residual,
                                l.fugacity_residual,
                                l.bfe_gradient_residual
                            ),
                        ));
                    }
                }
                Err(e) => {
                    rows.push(((p, method, 0), format!("{key},{},0,NaN,NaN,NaN,false,{}", method.name(), e.status())))
                }
            }
        }
    }
    Ok(csv(
        AUDIT_SCHEMA,
        "rate,method,link,max_entropy_residual,fugacity_residual,bfe_gradient_residual,pass,status",
        sorted(rows),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment, rates: RateSpec) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(experiment, TopologySpec::Cycle { n: 4 }, rates);
        cfg.slots = 20_000;
        cfg.seeds = vec![2, 1];
        cfg.methods = vec![Method::BetheVertex, Method::ExactOracle, Method::Sgd2];
        cfg
    }

    #[test]
    fn load_rows_are_sorted_and_complete() {
        let cfg = small(Experiment::ErrorVsLoad, RateSpec::Sweep { start: 0.1, stop: 0.3, step: 0.1 });
        let out = run_error_vs_load(&cfg).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], format!("# schema: {ERROR_VS_LOAD_SCHEMA}"));
        assert_eq!(lines.len(), 2 + 2 * 3 * 3);
        assert!(lines[2].starts_with("0.1,bethe_vertex,1,"));
    }

    #[test]
    fn overload_is_a_status_row() {
        let mut cfg = small(Experiment::ErrorVsLoad, RateSpec::Uniform { rate: 0.6 });
        cfg.methods = vec![Method::BetheSinr];
        cfg.seeds = vec![1];
        let out = run_error_vs_load(&cfg).unwrap();
        assert!(out.lines().nth(2).unwrap().ends_with(",NaN,infeasible_local_rates"), "{out}");
    }

    #[test]
    fn time_rows_and_single_sample() {
        let mut cfg = small(Experiment::ErrorVsTime, RateSpec::Uniform { rate: 0.2 });
        cfg.sample_every = Some(cfg.slots);
        let out = run_error_vs_time(&cfg).unwrap();
        assert_eq!(out.lines().count(), 2 + 2 * 3);
    }

    #[test]
    fn umax_outputs() {
        let mut cfg = small(Experiment::UmaxConvergence, RateSpec::Uniform { rate: 0.2 });
        cfg.max_iters = 1;
        let (traj, fug) = run_umax(&cfg).unwrap();
        assert_eq!(traj.lines().count(), 3);
        assert!(traj.lines().nth(1).unwrap().starts_with("iteration,subgradient_norm,rate_0"));
        assert_eq!(fug.lines().count(), 2 + 4);
    }

    #[test]
    fn audit_flags_edge_formula_on_a_cycle() {
        let mut cfg = small(Experiment::StationarityAudit, RateSpec::Uniform { rate: 0.2 });
        cfg.methods = vec![Method::BetheVertex, Method::BetheEdge];
        let out = run_stationarity_audit(&cfg).unwrap();
        let vertex_pass = out.lines().filter(|l| l.contains(",bethe_vertex,") && l.contains(",true,ok")).count();
        let edge_fail = out.lines().filter(|l| l.contains(",bethe_edge,") && l.contains(",false,")).count();
        assert_eq!(vertex_pass, 4);
        assert_eq!(edge_fail, 4);
    }
}
