//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csma_bethe::adaptive::{umax_run, StepSize, Utility};
use csma_bethe::bethe::{
    bethe_fugacities, bethe_fugacities_with_init, check_stationarity, conflict_global_fugacity_edge,
    conflict_global_fugacity_vertex, conflict_local_fugacities, solve_local_gibbsian, LocalInit, ServiceRateVector,
    SolverSettings,
};
use csma_bethe::csma::CsmaChain;
use csma_bethe::harness::{
    run_error_vs_load, run_experiment, run_sgd_compare, Experiment, ExperimentConfig, Instance, Method, RandomSpec,
    RateSpec, StepSpec, TopologySpec,
};
use csma_bethe::oracle::{
    enumerate_feasible_schedules, exact_distribution, exact_fugacities, exact_marginals, utility_optimum_bruteforce,
    OptimumSettings,
};
use csma_bethe::topology::conflict_network_from_edges;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn conflict(n: usize, edges: &[(usize, usize)]) -> Instance {
    Instance::from_network(conflict_network_from_edges(n, edges).unwrap()).unwrap()
}

fn others(inst: &Instance, i: usize, s: &[f64]) -> Vec<(usize, f64)> {
    inst.graph.neighborhood(i).iter().filter(|&&k| k != i).map(|&k| (k, s[k])).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Criterion 1: Closed form of the local problem against the numerical solver.
fn closed_form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let settings = SolverSettings::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        // Link 0 with 1..=5 neighbors; extra edges among the neighbors do
        // not enter link 0's local problem but keep the graphs generic.
        let n = rng.random_range(2..=6);
        let mut edges: Vec<(usize, usize)> = (1..n).filter(|_| rng.random_bool(0.7)).map(|k| (0, k)).collect();
        if edges.is_empty() {
            edges.push((0, 1));
        }
        for a in 1..n {
            for b in a + 1..n {
                if rng.random_bool(0.3) {
                    edges.push((a, b));
                }
            }
        }
        let inst = conflict(n, &edges);
        let s0: f64 = rng.random_range(0.02..0.9);
        let s: Vec<f64> =
            std::iter::once(s0).chain((1..n).map(|_| rng.random_range(0.01..(0.95 - s0).max(0.011)))).collect();
        let set = &inst.sets[0];
        let local: Vec<f64> = set.neighborhood().iter().map(|&k| s[k]).collect();
        let solved = match solve_local_gibbsian(set, &local, &settings) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("solver failed: {e}")),
        };
        let closed = conflict_local_fugacities(0, s[0], &others(&inst, 0, &s)).unwrap();
        for &k in set.neighborhood() {
            worst = worst.max(rel(solved.get(k).unwrap().exp(), closed.get(k).unwrap().exp()));
        }
    }
    outcome(worst <= 1e-8, format!("max relative deviation {worst:.2e} over 50 neighborhoods (tol 1e-8)"))
}

/// Criterion 2: Edge-centric formula against the exact oracle on trees.
fn tree_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let settings = SolverSettings::default();
    let trees = [("path5", vec![(0, 1), (1, 2), (2, 3), (3, 4)]), ("star5", vec![(0, 1), (0, 2), (0, 3), (0, 4)])];
    let (mut fug_err, mut marg_err): (f64, f64) = (0.0, 0.0);
    for (_, edges) in &trees {
        let inst = conflict(5, edges);
        let set = enumerate_feasible_schedules(&inst.network, &inst.graph).unwrap();
        for _ in 0..5 {
            // Interior rates: the marginals of a random fugacity vector.
            let logs: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..1.0)).collect();
            let s = exact_marginals(&logs, &set);
            let exact = exact_fugacities(&ServiceRateVector::new(s.clone()).unwrap(), &set, &settings).unwrap();
            for i in 0..5 {
                let edge = conflict_global_fugacity_edge(i, s[i], &others(&inst, i, &s)).unwrap().exp();
                fug_err = fug_err.max((edge - exact.lambda(i)).abs());
            }
            let back = exact_marginals(exact.logs(), &set);
            marg_err = marg_err.max(back.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    outcome(
        fug_err <= 1e-8 && marg_err <= 1e-10,
        format!("path5+star5: |edge - exact| {fug_err:.2e} (tol 1e-8), marginal round trip {marg_err:.2e} (tol 1e-10)"),
    )
}

/// Random topologies for criteria 3 and 4: ten conflict-graph and ten SINR
/// networks with at most ten links, and rates with every neighborhood
/// carrying total load at most 0.9.
fn stationarity_instances() -> Vec<(String, Instance, ServiceRateVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    (0..20)
        .map(|t| {
            let n = rng.random_range(3..=10);
            let spec = RandomSpec::new(n, rng.random());
            let (name, topo) = if t % 2 == 0 {
                ("conflict", TopologySpec::RandomConflict(spec))
            } else {
                ("sinr", TopologySpec::RandomSinr(spec))
            };
            let inst = Instance::build(&topo).unwrap();
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let worst =
                (0..n).map(|i| inst.graph.neighborhood(i).iter().map(|&k| raw[k]).sum::<f64>()).fold(0.0, f64::max);
            let s = raw.iter().map(|r| r * 0.9 / worst).collect();
            (format!("{name}{n}"), inst, ServiceRateVector::new(s).unwrap())
        })
        .collect()
}

/// Criterion 3: Stationarity of the Bethe fugacities.
fn bethe_stationarity(cases: &[(String, Instance, ServiceRateVector)]) -> Outcome {
    let settings = SolverSettings::default();
    let mut failures = Vec::new();
    let (mut ent, mut fug, mut bfe): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (name, inst, s) in cases {
        let lambda = match bethe_fugacities(&inst.graph, &inst.sets, s, &settings) {
            Ok(sol) => sol.fugacities,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        let rep = check_stationarity(&inst.graph, &inst.sets, s, &lambda, &settings, 1e-6);
        ent = ent.max(rep.max_entropy_residual);
        fug = fug.max(rep.fugacity_residual);
        bfe = bfe.max(rep.bfe_gradient_residual);
        if !rep.pass {
            failures.push(name.clone());
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "20 topologies: max-entropy residual {ent:.2e}, fugacity residual {fug:.2e}, BFE gradient {bfe:.2e} (tol 1e-6){}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

/// Criterion 4: Zero and random solver initializations give the same fugacities.
fn uniqueness(cases: &[(String, Instance, ServiceRateVector)]) -> Outcome {
    let settings = SolverSettings::default();
    let mut worst: f64 = 0.0;
    for (t, (name, inst, s)) in cases.iter().enumerate() {
        let a = bethe_fugacities(&inst.graph, &inst.sets, s, &settings);
        let init = LocalInit::Uniform { seed: 404 + t as u64, half_width: 1.0 };
        let b = bethe_fugacities_with_init(&inst.graph, &inst.sets, s, &settings, init);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                for (x, y) in a.fugacities.lambdas().iter().zip(b.fugacities.lambdas()) {
                    worst = worst.max((x - y).abs());
                }
            }
            _ => return outcome(false, format!("{name}: a solve failed")),
        }
    }
    outcome(worst <= 1e-8, format!("max |lambda(r=0) - lambda(r~U[-1,1])| {worst:.2e} over 20 topologies (tol 1e-8)"))
}

/// Criterion 5: Exact fugacities invert exact marginals.
fn oracle_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let settings = SolverSettings::default();
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let n = rng.random_range(1..=10);
        let spec = RandomSpec::new(n, rng.random());
        let topo = if t % 2 == 0 { TopologySpec::RandomConflict(spec) } else { TopologySpec::RandomSinr(spec) };
        let inst = Instance::build(&topo).unwrap();
        let set = enumerate_feasible_schedules(&inst.network, &inst.graph).unwrap();
        let logs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..1.5)).collect();
        let s = exact_marginals(&logs, &set);
        let back = match exact_fugacities(&ServiceRateVector::new(s).unwrap(), &set, &settings) {
            Ok(f) => f,
            Err(e) => return outcome(false, format!("trial {t}: {e}")),
        };
        for (l, b) in logs.iter().zip(back.lambdas()) {
            worst = worst.max((l.exp() - b).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max |lambda - round trip| {worst:.2e} over 20 trials (tol 1e-8)"))
}

/// Per-state frequencies of one chain run; true when at least 95% of the
/// states lie within 3 batch-means standard errors of `p`.
fn chain_run(inst: &Instance, logs: &[f64], seed: u64) -> (bool, usize, usize) {
    const SLOTS: u64 = 1_000_000;
    const BATCHES: usize = 100;
    let set = enumerate_feasible_schedules(&inst.network, &inst.graph).unwrap();
    let p = exact_distribution(logs, &set);
    let index: BTreeMap<u32, usize> = set.masks().iter().enumerate().map(|(k, &m)| (m, k)).collect();
    let mut batch = vec![vec![0u64; p.len()]; BATCHES];
    let mut chain = CsmaChain::new(&inst.network, &inst.graph, seed);
    let per = SLOTS / BATCHES as u64;
    for b in batch.iter_mut() {
        for _ in 0..per {
            chain.step(logs);
            let m = chain.state().schedule().to_mask() as u32;
            match index.get(&m) {
                Some(&k) => b[k] += 1,
                None => return (false, 0, p.len()),
            }
        }
    }
    let mut ok = 0;
    for (k, &pk) in p.iter().enumerate() {
        let means: Vec<f64> = batch.iter().map(|b| b[k] as f64 / per as f64).collect();
        let mean = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        let se = (var / BATCHES as f64).sqrt().max(1e-12);
        if (mean - pk).abs() <= 3.0 * se {
            ok += 1;
        }
    }
    (ok as f64 >= 0.95 * p.len() as f64, ok, p.len())
}

/// Criterion 6: Chain frequencies against the product form, on every conflict graph
/// with at most four links and on random SINR networks of that size.
fn chain_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut instances = Vec::new();
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for bits in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(b, _)| bits >> b & 1 == 1).map(|(_, &e)| e).collect();
            instances.push((format!("conflict{n}#{bits}"), conflict(n, &edges)));
        }
    }
    for t in 0..8 {
        let n = 2 + t % 3;
        let mut spec = RandomSpec::new(n, rng.random());
        spec.plane_side = 3.0;
        instances.push((format!("sinr{n}#{t}"), Instance::build(&TopologySpec::RandomSinr(spec)).unwrap()));
    }
    let mut failed = Vec::new();
    let mut reruns = 0;
    let mut slowest = Duration::ZERO;
    let (mut states_ok, mut states) = (0, 0);
    for (name, inst) in &instances {
        let logs: Vec<f64> = (0..inst.network.n_links()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let start = Instant::now();
        let mut run = chain_run(inst, &logs, rng.random());
        if !run.0 {
            reruns += 1;
            run = chain_run(inst, &logs, rng.random());
        }
        slowest = slowest.max(start.elapsed());
        states_ok += run.1;
        states += run.2;
        if !run.0 {
            failed.push(name.clone());
        }
    }
    let pass = failed.is_empty() && slowest < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "{} networks, 10^6 slots each: {states_ok}/{states} states within 3 SE, {reruns} reruns, slowest {:.2}s{}",
            instances.len(),
            slowest.as_secs_f64(),
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    )
}

/// Criterion 7: The 2-clique at s = (0.25, 0.25).
fn two_clique_point() -> Outcome {
    let inst = conflict(2, &[(0, 1)]);
    let s = ServiceRateVector::uniform(2, 0.25).unwrap();
    let settings = SolverSettings::default();
    let vertex = conflict_global_fugacity_vertex(0, 0.25, &[(1, 0.25)]).unwrap().exp();
    let edge = conflict_global_fugacity_edge(0, 0.25, &[(1, 0.25)]).unwrap().exp();
    let solver = bethe_fugacities(&inst.graph, &inst.sets, &s, &settings).unwrap().fugacities.lambda(0);
    let set = enumerate_feasible_schedules(&inst.network, &inst.graph).unwrap();
    let exact = exact_fugacities(&s, &set, &settings).unwrap().lambda(0);
    let errs = [(vertex - 0.75).abs(), (solver - 0.75).abs(), (edge - 0.5).abs(), (exact - 0.5).abs()];
    outcome(
        errs.iter().all(|&e| e <= 1e-12),
        format!(
            "vertex {vertex} (solver route {solver}), edge {edge}, exact {exact}; max deviation {:.2e} (tol 1e-12)",
            errs.iter().fold(0.0f64, |a, &b| a.max(b))
        ),
    )
}

/// Criterion 8: Error against load on the 4x4 grid.
fn error_vs_load() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(
        Experiment::ErrorVsLoad,
        TopologySpec::Grid { rows: 4, cols: 4 },
        RateSpec::Sweep { start: 0.05, stop: 0.20, step: 0.15 },
    );
    cfg.methods = vec![Method::BetheVertex];
    cfg.slots = 1_000_000;
    let csv = run_error_vs_load(&cfg).unwrap();
    let errors: BTreeMap<String, f64> = csv
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[3].parse().unwrap_or(f64::NAN))
        })
        .collect();
    let (lo, hi) = (errors["0.05"], errors["0.2"]);
    let elapsed = start.elapsed();
    outcome(
        lo.is_finite() && hi.is_finite() && lo < hi && lo < 0.05 && elapsed < Duration::from_secs(120),
        format!("e(0.05) = {lo:.5}, e(0.20) = {hi:.5}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Criterion 9: Static Bethe fugacities against SGD-1 and SGD-2.
fn bethe_vs_sgd() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(
        Experiment::SgdCompare,
        TopologySpec::RandomConflict(RandomSpec::new(15, 1)),
        RateSpec::Uniform { rate: 0.2 },
    );
    cfg.methods = vec![Method::BetheVertex, Method::Sgd1, Method::Sgd2];
    cfg.seeds = vec![1, 2, 3, 4, 5];
    cfg.slots = 1_000_000;
    let csv = run_sgd_compare(&cfg).unwrap();
    let mut by_method: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for l in csv.lines().skip(2) {
        let f: Vec<&str> = l.split(',').collect();
        by_method.entry(f[0].to_string()).or_default().push(f[2].parse().unwrap_or(f64::NAN));
    }
    let m = |k: &str| median(by_method.get(k).cloned().unwrap_or_default());
    let (b, s1, s2) = (m("bethe_vertex"), m("sgd1"), m("sgd2"));
    let elapsed = start.elapsed();
    outcome(
        b <= s1 && b <= s2 && elapsed < Duration::from_secs(300),
        format!("median final running error: bethe {b:.5}, sgd1 {s1:.5}, sgd2 {s2:.5}; {:.1}s", elapsed.as_secs_f64()),
    )
}

/// Criterion 10: Convergence of the local utility maximization.
fn umax_convergence() -> Outcome {
    let start = Instant::now();
    let inst = Instance::build(&TopologySpec::RandomConflict(RandomSpec::new(15, 1))).unwrap();
    let logs = vec![Utility::Log; 15];
    // 201 evaluations: the last one is the norm after 200 updates.
    let run = umax_run(&inst.graph, &inst.sets, &logs, 1.0, StepSize::Harmonic, 201, 0.0).unwrap();
    let first = run.trajectory[0].subgradient_norm;
    let last = run.trajectory[200].subgradient_norm;
    let ratio = last / first;

    let clique = conflict(2, &[(0, 1)]);
    let two = vec![Utility::Log; 2];
    let run2 = umax_run(&clique.graph, &clique.sets, &two, 100.0, StepSize::Constant(1.0), 5000, 1e-9).unwrap();
    let dev = run2.final_rates.iter().map(|r| (r - 0.5).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        ratio < 0.1 && dev <= 0.02 && elapsed < Duration::from_secs(30),
        format!(
            "15 links: norm {first:.4} -> {last:.4} after 200 updates (ratio {ratio:.3}, need < 0.1); \
             2-clique theta=100: rates ({:.4}, {:.4}) after {} iterations; {:.1}s",
            run2.final_rates[0],
            run2.final_rates[1],
            run2.trajectory.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Criterion 11: Utility gap of the converged rates.
fn utility_bound() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst_slack = f64::INFINITY;
    let mut unconverged = 0;
    let mut worst_drift: f64 = 0.0;
    for t in 0..10 {
        let n = rng.random_range(2..=5);
        let spec = RandomSpec::new(n, rng.random());
        let topo = if t % 2 == 0 { TopologySpec::RandomConflict(spec) } else { TopologySpec::RandomSinr(spec) };
        let inst = Instance::build(&topo).unwrap();
        let utilities = vec![Utility::Log; n];
        let set = enumerate_feasible_schedules(&inst.network, &inst.graph).unwrap();
        let opt = utility_optimum_bruteforce(&set, &utilities, &OptimumSettings::default()).unwrap();
        let entropy_budget: f64 = inst.sets.iter().map(|s| (s.len() as f64).ln()).sum();
        for theta in [1.0, 10.0, 100.0] {
            let run =
                umax_run(&inst.graph, &inst.sets, &utilities, theta, StepSize::Constant(0.5), 50_000, 1e-8).unwrap();
            // With a rate on the boundary the dual optimum is at infinity and
            // the norm decays only like 1/t, so convergence is judged on the
            // rates once the norm stalls.
            let tr = &run.trajectory;
            let settled = tr.last().unwrap().subgradient_norm <= 1e-8 || {
                let back = &tr[tr.len() - 1001].rates;
                let drift = run.final_rates.iter().zip(back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst_drift = worst_drift.max(drift);
                drift <= 1e-6
            };
            if !settled {
                unconverged += 1;
            }
            let achieved: f64 = run.final_rates.iter().map(|&s| s.ln()).sum();
            let slack = achieved - (opt.upper_bound() - entropy_budget / theta - 1e-6);
            worst_slack = worst_slack.min(slack);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_slack >= 0.0 && unconverged == 0 && elapsed < Duration::from_secs(60),
        format!(
            "10 networks x theta in {{1,10,100}}: min slack {worst_slack:.3e}, {unconverged} unconverged runs, \
             max rate drift over the last 1000 iterations of stalled runs {worst_drift:.1e}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// Criterion 12: Byte-identical CSVs across runs.
fn determinism() -> Outcome {
    let topo = TopologySpec::RandomConflict(RandomSpec::new(10, 3));
    let mut configs = Vec::new();
    for (exp, rates) in [
        (Experiment::ErrorVsLoad, RateSpec::Sweep { start: 0.05, stop: 0.15, step: 0.05 }),
        (Experiment::ErrorVsTime, RateSpec::Uniform { rate: 0.15 }),
        (Experiment::SgdCompare, RateSpec::Uniform { rate: 0.15 }),
        (Experiment::UmaxConvergence, RateSpec::Uniform { rate: 0.15 }),
        (Experiment::StationarityAudit, RateSpec::Sweep { start: 0.05, stop: 0.15, step: 0.05 }),
    ] {
        let mut cfg = ExperimentConfig::new(exp, topo.clone(), rates);
        cfg.methods = vec![Method::BetheVertex, Method::BetheSinr, Method::ExactOracle, Method::Sgd1, Method::Sgd2];
        cfg.seeds = vec![7, 3, 5];
        cfg.slots = 100_000;
        cfg.step = StepSpec::InvSqrt;
        configs.push(cfg);
    }
    let mut differing = Vec::new();
    for cfg in &configs {
        let a = run_experiment(cfg).unwrap();
        let b = run_experiment(cfg).unwrap();
        if a != b {
            differing.push(format!("{:?}", cfg.experiment));
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "5 experiments run twice{}",
            if differing.is_empty() {
                ", all identical".to_string()
            } else {
                format!("; differ: {}", differing.join(", "))
            }
        ),
    )
}

fn main() {
    let cases = stationarity_instances();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("closed-form/solver equivalence", Box::new(closed_form_equivalence)),
        ("tree exactness", Box::new(tree_exactness)),
        ("Bethe stationarity", Box::new(|| bethe_stationarity(&cases))),
        ("uniqueness", Box::new(|| uniqueness(&cases))),
        ("oracle round trip", Box::new(oracle_round_trip)),
        ("chain correctness", Box::new(chain_correctness)),
        ("2-clique reference point", Box::new(two_clique_point)),
        ("error vs load", Box::new(error_vs_load)),
        ("Bethe vs SGD", Box::new(bethe_vs_sgd)),
        ("utility maximization convergence", Box::new(umax_convergence)),
        ("utility gap bound", Box::new(utility_bound)),
        ("determinism", Box::new(determinism)),
    ];
    let time_limits = [
        5.0,
        1.0,
        30.0,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
        120.0,
        300.0,
        30.0,
        60.0,
        f64::INFINITY,
    ];
    let mut failed = 0;
    for (k, ((name, f), limit)) in criteria.iter().zip(time_limits).enumerate() {
        let start = Instant::now();
        let mut o = f();
        let secs = start.elapsed().as_secs_f64();
        if secs > limit {
            o.pass = false;
            o.detail.push_str(&format!("; exceeded {limit}s"));
        }
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {} [{secs:.2}s]", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
