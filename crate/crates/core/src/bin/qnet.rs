use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quantum_backbone::analytics::ERAnalytic;
use quantum_backbone::backbone::{compute_backbone, hysteresis};
use quantum_backbone::experiment::{
    analytic_metrics, compute_metrics, parse_diameter_method, phase_csv, phase_diagram,
    run_experiment, validate, ExperimentConfig,
};
use quantum_backbone::graph::{read_edge_list, write_edge_list, Graph};
use quantum_backbone::netgen::{generate, TopologyConfig, TopologyKind};
use quantum_backbone::percolation::{
    measure_curve_opts, uniform_grid, CurveOptions, FailureMode, PercolationCurve,
    DEFAULT_BREAK_FRACTION, DEFAULT_GRID_STEP, DEFAULT_RUNS,
};
use quantum_backbone::resources::{
    read_resources, sample_resources, write_resources, DistributionKind, LCurve, RepeaterModel,
    ResourceDistribution,
};
use quantum_backbone::{Error, Result};

#[derive(Parser)]
#[command(name = "qnet", version, about = "Robustness analysis of entanglement-limited quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an ER, BA or RGG topology.
    Generate {
        #[arg(long)]
        kind: TopologyKind,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        degree: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw entangled-pair counts for every link.
    Assign {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo diameter and giant-component curves.
    Percolate {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Largest functionally connected backbone of a resourced graph.
    Backbone {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        resources: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fixed-point sweep over link failure rates.
    Hysteresis {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        y_step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Network metrics from a simulated graph or the ER approximation.
    Metrics {
        #[arg(long, conflicts_with = "analytic", required_unless_present = "analytic")]
        graph: Option<PathBuf>,
        /// Only `er` is available.
        #[arg(long)]
        analytic: Option<String>,
        #[arg(long, required_if_eq("analytic", "er"))]
        nodes: Option<usize>,
        #[arg(long, required_if_eq("analytic", "er"))]
        degree: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = DEFAULT_BREAK_FRACTION)]
        break_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hysteresis edges across a sweep of mean resource levels.
    PhaseDiagram {
        /// Only `mean_n` is available.
        #[arg(long, default_value = "mean_n")]
        sweep: String,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "exp")]
        dist: DistributionKind,
        #[arg(long)]
        stddev: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Smallest ⟨n⟩/(ln N)^α.
        #[arg(long, default_value_t = 1.0)]
        from: f64,
        /// Largest ⟨n⟩/(ln N)^α.
        #[arg(long, default_value_t = 40.0)]
        to: f64,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        y_step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full recipe from a key = value file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check graph and resource files.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        resources: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, default_value = "exp")]
    dist: DistributionKind,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    stddev: Option<f64>,
}

impl DistArgs {
    fn build(&self) -> Result<ResourceDistribution> {
        let mean = self
            .mean
            .ok_or_else(|| Error::InvalidConfig("--mean is required".into()))?;
        ResourceDistribution::new(self.dist, mean, self.stddev)
    }
}

#[derive(Args)]
struct CurveArgs {
    /// Largest x+y; defaults to ln⟨k⟩ + 1 of the input graph.
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `exact` or `bounded:<sweeps>`.
    #[arg(long, default_value = "exact")]
    diameter: String,
    /// Remove nodes instead of links.
    #[arg(long)]
    node_failures: bool,
}

impl CurveArgs {
    fn measure(&self, g: &Graph) -> Result<PercolationCurve> {
        let max = self.grid_max.unwrap_or_else(|| g.mean_degree().ln() + 1.0);
        if !(max > 0.0 && self.grid_step > 0.0) {
            return Err(Error::InvalidConfig("grid bounds must be positive".into()));
        }
        let opts = CurveOptions {
            mode: if self.node_failures { FailureMode::Node } else { FailureMode::Bond },
            diameter: parse_diameter_method(&self.diameter)?,
        };
        measure_curve_opts(g, &uniform_grid(max, self.grid_step), self.runs, self.seed, &opts)
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    read_edge_list(BufReader::new(fs::File::open(path)?))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Generate { kind, nodes, degree, seed, out } => {
            let g = generate(&TopologyConfig::new(kind, nodes, degree, seed))?;
            write_edge_list(&g, fs::File::create(out)?)?;
        }
        Command::Assign { dist, seed, graph, out } => {
            let g = load_graph(&graph)?;
            let res = sample_resources(&g, &dist.build()?, seed);
            write_resources(&g, &res, fs::File::create(out)?)?;
        }
        Command::Percolate { graph, curve, out } => {
            let c = curve.measure(&load_graph(&graph)?)?;
            fs::write(out, c.to_csv())?;
        }
        Command::Backbone { graph, resources, alpha, out } => {
            let g = load_graph(&graph)?;
            let res = read_resources(&g, BufReader::new(fs::File::open(resources)?))?;
            let b = compute_backbone(&g, &res, &RepeaterModel::new(alpha)?)?;
            let json = serde_json::json!({
                "l_fixed": b.l_fixed,
                "n_fixed": b.n_fixed,
                "backbone_size": b.backbone_size,
                "diameter": b.diameter,
                "nodes": b.backbone_nodes,
            });
            write_json(&out, &json)?;
        }
        Command::Hysteresis { graph, dist, alpha, curve, y_step, out } => {
            let lc = LCurve::new(dist.build()?, RepeaterModel::new(alpha)?);
            let c = curve.measure(&load_graph(&graph)?)?;
            let h = hysteresis(&lc, &c, &uniform_grid(c.grid_max(), y_step))?;
            fs::write(out, h.to_csv())?;
        }
        Command::Metrics { graph, analytic, nodes, degree, alpha, dist, curve, break_fraction, out } => {
            let model = RepeaterModel::new(alpha)?;
            let d = dist.build()?;
            let m = match (graph, analytic.as_deref()) {
                (Some(path), None) => {
                    let c = curve.measure(&load_graph(&path)?)?;
                    let lc = LCurve::new(d, model);
                    let h = hysteresis(&lc, &c, &uniform_grid(c.grid_max(), curve.grid_step))?;
                    compute_metrics(&c, d.mean(), &model, break_fraction, Some(&h))?
                }
                (None, Some("er")) => {
                    let a = ERAnalytic::new(nodes.unwrap_or_default(), degree.unwrap_or_default())?;
                    analytic_metrics(&a, d.mean(), &model, curve.grid_step)?
                }
                (_, Some(other)) => {
                    return Err(Error::InvalidConfig(format!("no analytic model {other:?}")))
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            write_json(&out, &m)?;
        }
        Command::PhaseDiagram { sweep, graph, dist, stddev, alpha, from, to, steps, curve, y_step, out } => {
            if sweep != "mean_n" {
                return Err(Error::InvalidConfig(format!("cannot sweep {sweep:?}; only mean_n")));
            }
            if steps < 2 || !(from > 0.0 && to > from) {
                return Err(Error::InvalidConfig("need 0 < from < to and steps >= 2".into()));
            }
            let factors: Vec<f64> = (0..steps)
                .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                .collect();
            let c = curve.measure(&load_graph(&graph)?)?;
            let model = RepeaterModel::new(alpha)?;
            let rows = phase_diagram(&c, dist, stddev, &model, &factors, &uniform_grid(c.grid_max(), y_step))?;
            fs::write(out, phase_csv(&rows))?;
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = run_experiment(&cfg)?;
            println!("{} complete, config {}", report.out_dir.display(), report.config_hash);
        }
        Command::Validate { graph, resources } => {
            let report = validate(&graph, resources.as_deref())?;
            print!("{report}");
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
            println!();
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qnet: {e}");
            match e {
                Error::Parse { .. }
                | Error::SelfLoop(..)
                | Error::DuplicateEdge(..)
                | Error::NodeOutOfRange { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
