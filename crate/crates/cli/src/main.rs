use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use csma_bethe::adaptive::{sgd_run, SgdInit, SgdVariant};
use csma_bethe::bethe::{FugacityVector, ServiceRateVector};
use csma_bethe::csma::simulate;
use csma_bethe::harness::{
    run_experiment, static_fugacities, write_outputs, Experiment, ExperimentConfig, Instance, Method, RandomSpec,
    TopologySpec,
};
use csma_bethe::topology::Network;

#[derive(Parser)]
#[command(name = "csma-bethe", version, about = "Bethe-approximated CSMA fugacities and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a network in the flat text format.
    Generate(GenerateArgs),
    /// Compute fugacities for target service rates.
    Fugacities(FugacitiesArgs),
    /// Simulate the CSMA chain and report achieved service rates.
    Simulate(SimulateArgs),
    /// Run stochastic-gradient fugacity adaptation.
    Sgd(SgdArgs),
    /// Run the local utility maximization experiment of a config file.
    Umax(ExperimentArgs),
    /// Run an error-vs-load, error-vs-time or sgd-compare experiment.
    Sweep(ExperimentArgs),
    /// Run a stationarity audit experiment.
    Audit(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyKind {
    RandomSinr,
    RandomConflict,
    Grid,
    Complete,
    Path,
    Cycle,
    Star,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: TopologyKind,
    /// Number of links (random, complete, path, cycle, star).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 8.0)]
    plane_side: f64,
    #[arg(long, default_value_t = 0.5)]
    link_length: f64,
    #[arg(long, default_value_t = 3.0)]
    path_loss_exponent: f64,
    #[arg(long, default_value_t = 2.4)]
    close_in_radius: f64,
    #[arg(long, default_value_t = 15.0)]
    sinr_threshold_db: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_power: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StaticMethod {
    BetheVertex,
    BetheEdge,
    BetheSinr,
    ExactOracle,
}

impl From<StaticMethod> for Method {
    fn from(m: StaticMethod) -> Self {
        match m {
            StaticMethod::BetheVertex => Method::BetheVertex,
            StaticMethod::BetheEdge => Method::BetheEdge,
            StaticMethod::BetheSinr => Method::BetheSinr,
            StaticMethod::ExactOracle => Method::ExactOracle,
        }
    }
}

#[derive(Args)]
struct Targets {
    /// Uniform target service rate.
    #[arg(long, conflicts_with = "rates", required_unless_present = "rates")]
    rate: Option<f64>,
    /// Comma-separated per-link target rates.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
}

impl Targets {
    fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        match (&self.rates, self.rate) {
            (Some(r), _) if r.len() == n => Ok(r.clone()),
            (Some(r), _) => bail!("--rates has {} entries, network has {n} links", r.len()),
            (None, Some(r)) => Ok(vec![r; n]),
            (None, None) => bail!("one of --rate or --rates is required"),
        }
    }
}

#[derive(Args)]
struct FugacitiesArgs {
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    targets: Targets,
    #[arg(long, value_enum, default_value = "bethe-sinr")]
    method: StaticMethod,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    network: PathBuf,
    /// Fugacity CSV as written by `fugacities`.
    #[arg(long)]
    fugacities: PathBuf,
    #[command(flatten)]
    targets: Targets,
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    /// Defaults to a tenth of the slots.
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Sgd1,
    Sgd2,
}

#[derive(Args)]
struct SgdArgs {
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    targets: Targets,
    #[arg(long, value_enum)]
    variant: Variant,
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    /// Defaults to a hundredth of the slots.
    #[arg(long)]
    sample_every: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Seeds, replacing those of the config; repeatable or comma-separated.
    #[arg(long, required = true, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn read_network(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Network::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn instance(network: Network) -> Result<Instance> {
    Ok(Instance::from_network(network)?)
}

fn generate(a: GenerateArgs) -> Result<()> {
    let need_n = || a.n.context("--n is required for this kind");
    let random = |n| RandomSpec {
        n_links: n,
        seed: a.seed,
        plane_side: a.plane_side,
        link_length: a.link_length,
        path_loss_exponent: a.path_loss_exponent,
        close_in_radius: a.close_in_radius,
        sinr_threshold_db: a.sinr_threshold_db,
        noise_power: a.noise_power,
    };
    let spec = match a.kind {
        TopologyKind::RandomSinr => TopologySpec::RandomSinr(random(need_n()?)),
        TopologyKind::RandomConflict => TopologySpec::RandomConflict(random(need_n()?)),
        TopologyKind::Grid => TopologySpec::Grid {
            rows: a.rows.context("--rows is required for a grid")?,
            cols: a.cols.context("--cols is required for a grid")?,
        },
        TopologyKind::Complete => TopologySpec::Complete { n: need_n()? },
        TopologyKind::Path => TopologySpec::Path { n: need_n()? },
        TopologyKind::Cycle => TopologySpec::Cycle { n: need_n()? },
        TopologyKind::Star => TopologySpec::Star { n: need_n()? },
    };
    write(&a.out, &spec.build()?.to_text())
}

fn fugacities(a: FugacitiesArgs) -> Result<()> {
    let inst = instance(read_network(&a.network)?)?;
    let target = a.targets.resolve(inst.network.n_links())?;
    let f = static_fugacities(&inst, a.method.into(), &target)?;
    write(&a.out, &f.to_csv())
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let inst = instance(read_network(&a.network)?)?;
    let text = fs::read_to_string(&a.fugacities).with_context(|| format!("reading {}", a.fugacities.display()))?;
    let f = FugacityVector::from_csv(&text)?;
    let target = a.targets.resolve(inst.network.n_links())?;
    let burn_in = a.burn_in.unwrap_or(a.slots / 10);
    let stats = simulate(&inst.network, &inst.graph, f.logs(), a.slots, burn_in, a.seed)?;
    write(&a.out, &stats.to_csv(&target)?)
}

fn sgd(a: SgdArgs) -> Result<()> {
    let inst = instance(read_network(&a.network)?)?;
    let n = inst.network.n_links();
    let target = ServiceRateVector::new(a.targets.resolve(n)?)?;
    let variant = match a.variant {
        Variant::Sgd1 => SgdVariant::Sgd1,
        Variant::Sgd2 => SgdVariant::Sgd2,
    };
    let every = a.sample_every.unwrap_or((a.slots / 100).max(1));
    let run = sgd_run(&inst.network, &inst.graph, &target, variant, a.slots, every, a.seed, &SgdInit::Zero)?;
    let mut out = String::from("# schema: csma-bethe/sgd_trajectory/v1\nslot,running_error");
    for i in 0..n {
        out.push_str(&format!(",log_lambda_{i}"));
    }
    out.push('\n');
    for p in &run.points {
        out.push_str(&format!("{},{}", p.slot, p.running_error));
        for l in &p.log_lambda {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
    }
    write(&a.out, &out)
}

fn experiment(a: ExperimentArgs, allowed: &[Experiment], name: &str) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    if !allowed.contains(&cfg.experiment) {
        bail!("`{name}` cannot run a {:?} experiment", cfg.experiment);
    }
    // Network files are resolved relative to the config file.
    if let TopologySpec::NetworkFile { path } = &mut cfg.topology {
        if path.is_relative() {
            if let Some(dir) = a.config.parent() {
                *path = dir.join(&*path);
            }
        }
    }
    cfg.seeds = a.seed;
    if let Some(s) = a.slots {
        cfg.slots = s;
    }
    if let Some(t) = a.theta {
        cfg.theta = t;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.output = Some(a.out.clone());
    let files = run_experiment(&cfg)?;
    for p in write_outputs(&a.out, &files)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Fugacities(a) => fugacities(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sgd(a) => sgd(a),
        Command::Umax(a) => experiment(a, &[Experiment::UmaxConvergence], "umax"),
        Command::Sweep(a) => {
            experiment(a, &[Experiment::ErrorVsLoad, Experiment::ErrorVsTime, Experiment::SgdCompare], "sweep")
        }
        Command::Audit(a) => experiment(a, &[Experiment::StationarityAudit], "audit"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
