//! Reproducible experiment recipes.
//!
//! A recipe is a plain-text `key = value` file. Every key has a default, and
//! the fully resolved key set is echoed into `manifest.txt` together with its
//! SHA-256, so a manifest alone is enough to rerun an experiment.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `topology` | `er` | `er`, `ba` or `rgg` |
//! | `nodes` | `10000` | node count |
//! | `degree` | `6` | mean degree |
//! | `distribution` | `exp` | `exp`, `uniform`, `poisson` or `gauss` |
//! | `mean` | unset | mean pairs per link; overrides `mean_per_ln_n` |
//! | `mean_per_ln_n` | `15` | mean pairs as a multiple of `(ln N)^alpha` |
//! | `stddev` | unset | Gaussian spread, `mean / 3` when unset |
//! | `alpha` | `1` | repeater efficiency exponent |
//! | `grid_max` | `auto` | largest x+y; `auto` picks it per topology |
//! | `grid_step` | `0.02` | spacing of the x+y grid |
//! | `y_step` | `0.02` | spacing of the failure sweep |
//! | `runs` | `100` | Monte Carlo runs per gridpoint |
//! | `seed` | `1` | master seed |
//! | `break_fraction` | `0.01` | giant-component fraction marking the break |
//! | `diameter` | `exact` | `exact` or `bounded:<sweeps>` |
//! | `realizations` | `1` | extra independent graphs for per-realization metrics |
//! | `out_dir` | `out` | artifact directory |

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{
    alpha_critical, n_critical, y_monotonicity, yc1_from_yc3, DiameterProfile, ERAnalytic,
};
use crate::backbone::{hysteresis, HysteresisResult};
use crate::error::{Error, Result};
use crate::graph::{read_edge_list, write_edge_list, Graph};
use crate::netgen::{generate, TopologyConfig, TopologyKind};
use crate::percolation::{
    d_max, default_grid_max, estimate_yc3, measure_curve_opts, uniform_grid, CurveOptions,
    DiameterMethod, PercolationCurve, DEFAULT_BREAK_FRACTION, DEFAULT_GRID_STEP, DEFAULT_RUNS,
};
use crate::resources::{
    parse_resource_lines, sample_resources, write_resources, DistributionKind, LCurve,
    RepeaterModel, ResourceDistribution,
};
use crate::seed::derive_seed;

/// How the mean resource level is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeanLevel {
    Absolute(f64),
    /// Multiple of `(ln N)^alpha`.
    PerLnN(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: TopologyKind,
    pub nodes: usize,
    pub degree: f64,
    pub distribution: DistributionKind,
    pub mean: MeanLevel,
    pub stddev: Option<f64>,
    pub alpha: f64,
    pub grid_max: Option<f64>,
    pub grid_step: f64,
    pub y_step: f64,
    pub runs: usize,
    pub seed: u64,
    pub break_fraction: f64,
    pub diameter: DiameterMethod,
    pub realizations: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: TopologyKind::Er,
            nodes: 10_000,
            degree: 6.0,
            distribution: DistributionKind::Exp,
            mean: MeanLevel::PerLnN(15.0),
            stddev: None,
            alpha: 1.0,
            grid_max: None,
            grid_step: DEFAULT_GRID_STEP,
            y_step: DEFAULT_GRID_STEP,
            runs: DEFAULT_RUNS,
            seed: 1,
            break_fraction: DEFAULT_BREAK_FRACTION,
            diameter: DiameterMethod::Exact,
            realizations: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
}

/// Parses `exact`, `bounded:<sweeps>` or `skip`.
pub fn parse_diameter_method(value: &str) -> Result<DiameterMethod> {
    match value.split_once(':') {
        None if value == "exact" => Ok(DiameterMethod::Exact),
        None if value == "skip" => Ok(DiameterMethod::Skip),
        Some(("bounded", n)) => Ok(DiameterMethod::Bounded {
            max_bfs: parse_num("diameter", n)?,
        }),
        _ => Err(Error::InvalidConfig(format!(
            "diameter: expected exact, skip or bounded:<sweeps>, got {value:?}"
        ))),
    }
}

fn diameter_method_name(m: DiameterMethod) -> String {
    match m {
        DiameterMethod::Exact => "exact".into(),
        DiameterMethod::Skip => "skip".into(),
        DiameterMethod::Bounded { max_bfs } => format!("bounded:{max_bfs}"),
    }
}

impl ExperimentConfig {
    /// Parses a `key = value` recipe; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        let mut explicit_mean = None;
        let mut per_ln_n = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidConfig(format!("line {}: duplicate key {key}", i + 1)));
            }
            match key {
                "topology" => cfg.topology = value.parse()?,
                "nodes" => cfg.nodes = parse_num(key, value)?,
                "degree" => cfg.degree = parse_num(key, value)?,
                "distribution" => cfg.distribution = value.parse()?,
                "mean" => explicit_mean = Some(parse_num(key, value)?),
                "mean_per_ln_n" => per_ln_n = Some(parse_num(key, value)?),
                "stddev" => cfg.stddev = Some(parse_num(key, value)?),
                "alpha" => cfg.alpha = parse_num(key, value)?,
                "grid_max" => {
                    cfg.grid_max = if value == "auto" { None } else { Some(parse_num(key, value)?) }
                }
                "grid_step" => cfg.grid_step = parse_num(key, value)?,
                "y_step" => cfg.y_step = parse_num(key, value)?,
                "runs" => cfg.runs = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "break_fraction" => cfg.break_fraction = parse_num(key, value)?,
                "diameter" => cfg.diameter = parse_diameter_method(value)?,
                "realizations" => cfg.realizations = parse_num(key, value)?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                other => {
                    return Err(Error::InvalidConfig(format!("line {}: unknown key {other}", i + 1)))
                }
            }
        }
        cfg.mean = match (explicit_mean, per_ln_n) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig("set either mean or mean_per_ln_n, not both".into()))
            }
            (Some(m), None) => MeanLevel::Absolute(m),
            (None, Some(f)) => MeanLevel::PerLnN(f),
            (None, None) => cfg.mean,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn topology_config(&self) -> TopologyConfig {
        TopologyConfig::new(self.topology, self.nodes, self.degree, derive_seed(self.seed, &[0]))
    }

    pub fn model(&self) -> Result<RepeaterModel> {
        RepeaterModel::new(self.alpha).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Mean pairs per link after resolving `mean_per_ln_n`.
    pub fn mean_n(&self) -> f64 {
        match self.mean {
            MeanLevel::Absolute(m) => m,
            MeanLevel::PerLnN(f) => f * (self.nodes as f64).ln().powf(self.alpha),
        }
    }

    pub fn distribution(&self) -> Result<ResourceDistribution> {
        ResourceDistribution::new(self.distribution, self.mean_n(), self.stddev)
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn curve_options(&self) -> CurveOptions {
        CurveOptions {
            diameter: self.diameter,
            ..CurveOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.topology_config().validate()?;
        self.model()?;
        self.distribution()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("grid_step", self.grid_step)?;
        positive("y_step", self.y_step)?;
        if let Some(m) = self.grid_max {
            positive("grid_max", m)?;
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be positive".into()));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations must be positive".into()));
        }
        if !(self.break_fraction > 0.0 && self.break_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "break_fraction must lie in (0, 1), got {}",
                self.break_fraction
            )));
        }
        match self.diameter {
            DiameterMethod::Bounded { max_bfs } if max_bfs < 5 => Err(Error::InvalidConfig(
                "bounded diameters need at least 5 sweeps".into(),
            )),
            DiameterMethod::Skip => Err(Error::InvalidConfig(
                "experiments need diameters; use exact or bounded:<sweeps>".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Every key with its resolved value, one `key=value` per line, in a fixed order.
    pub fn canonical(&self) -> String {
        let opt = |v: Option<f64>, none: &str| v.map(|x| x.to_string()).unwrap_or_else(|| none.into());
        let (mean, per_ln_n) = match self.mean {
            MeanLevel::Absolute(m) => (m.to_string(), "unset".to_string()),
            MeanLevel::PerLnN(f) => ("unset".to_string(), f.to_string()),
        };
        let pairs = [
            ("topology", self.topology.to_string()),
            ("nodes", self.nodes.to_string()),
            ("degree", self.degree.to_string()),
            ("distribution", self.distribution.to_string()),
            ("mean", mean),
            ("mean_per_ln_n", per_ln_n),
            ("stddev", opt(self.stddev, "unset")),
            ("alpha", self.alpha.to_string()),
            ("grid_max", opt(self.grid_max, "auto")),
            ("grid_step", self.grid_step.to_string()),
            ("y_step", self.y_step.to_string()),
            ("runs", self.runs.to_string()),
            ("seed", self.seed.to_string()),
            ("break_fraction", self.break_fraction.to_string()),
            ("diameter", diameter_method_name(self.diameter)),
            ("realizations", self.realizations.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
        ];
        pairs.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}={v}");
            s
        })
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Summary numbers of one percolation curve under one resource model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub node_count: usize,
    pub mean_n: f64,
    pub alpha: f64,
    /// Structural break; absent if the grid never reaches it.
    pub y_c3: Option<f64>,
    /// Largest mean diameter; apply `alpha` at the point of use.
    #[serde(rename = "D_max")]
    pub d_max: f64,
    pub n_c: Option<f64>,
    /// Absent when the diameter never grows before the break.
    pub alpha_c: Option<f64>,
    /// y_c3 − D_max^α/⟨n⟩.
    pub y_c1_estimate: Option<f64>,
    pub broken_at_origin: bool,
    pub y_c1: Option<f64>,
    pub y_c2: Option<f64>,
    pub discontinuous: bool,
    pub overlap_width: f64,
    /// Y(x̃) strictly increasing below the break: a single fixed point per y.
    pub y_increasing: bool,
    pub y_decreasing: bool,
    /// Every diameter behind the curve is proven exact.
    pub diameters_certified: bool,
}

/// Derives [`Metrics`] from a curve, optionally with a hysteresis sweep.
pub fn compute_metrics(
    curve: &PercolationCurve,
    mean_n: f64,
    model: &RepeaterModel,
    break_fraction: f64,
    hyst: Option<&HysteresisResult>,
) -> Result<Metrics> {
    let y_c3 = match estimate_yc3(curve, break_fraction) {
        Ok(v) => Some(v),
        Err(Error::GridTooShort) => None,
        Err(e) => return Err(e),
    };
    let dmax = d_max(curve);
    let profile = DiameterProfile::from_curve(curve);
    let upto = y_c3.unwrap_or(curve.grid_max() + curve.grid_step());
    let n_c = n_critical(&profile, model, upto).ok();
    let alpha_c = alpha_critical(&profile, upto).ok().filter(|a| a.is_finite());
    let estimate = y_c3.map(|y| yc1_from_yc3(y, dmax, mean_n, model)).transpose()?;
    let mono = y_monotonicity(&profile, mean_n, model, upto);
    Ok(Metrics {
        node_count: curve.node_count,
        mean_n,
        alpha: model.alpha(),
        y_c3,
        d_max: dmax,
        n_c,
        alpha_c,
        y_c1_estimate: estimate.map(|e| e.y_c1),
        broken_at_origin: estimate.is_some_and(|e| e.broken_at_origin),
        y_c1: hyst.and_then(|h| h.y_c1),
        y_c2: hyst.and_then(|h| h.y_c2),
        discontinuous: hyst.is_some_and(|h| h.discontinuous),
        overlap_width: hyst.map_or(0.0, HysteresisResult::overlap_width),
        y_increasing: mono.increasing,
        y_decreasing: mono.decreasing,
        diameters_certified: curve.fully_certified(),
    })
}

/// Metrics from the Erdős–Rényi diameter approximation sampled every `step`
/// up to the pole at ln c. No hysteresis sweep is run.
///
/// The approximation diverges at the pole, so `D_max`, `n_c` and the y_c1
/// estimate are set by the last sample before it and grow as `step` shrinks.
pub fn analytic_metrics(a: &ERAnalytic, mean_n: f64, model: &RepeaterModel, step: f64) -> Result<Metrics> {
    let y_c3 = a.threshold();
    let profile = DiameterProfile::from_er(a, y_c3, step)?;
    let dmax = profile.d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let estimate = yc1_from_yc3(y_c3, dmax, mean_n, model)?;
    let mono = y_monotonicity(&profile, mean_n, model, y_c3);
    Ok(Metrics {
        node_count: a.n,
        mean_n,
        alpha: model.alpha(),
        y_c3: Some(y_c3),
        d_max: dmax,
        n_c: Some(n_critical(&profile, model, y_c3)?),
        alpha_c: Some(alpha_critical(&profile, y_c3)?).filter(|v| v.is_finite()),
        y_c1_estimate: Some(estimate.y_c1),
        broken_at_origin: estimate.broken_at_origin,
        y_c1: None,
        y_c2: None,
        discontinuous: !mono.increasing,
        overlap_width: 0.0,
        y_increasing: mono.increasing,
        y_decreasing: mono.decreasing,
        diameters_certified: true,
    })
}

/// One point of a resource sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub mean_n_over_ln_n: f64,
    pub mean_n: f64,
    pub y_c1: Option<f64>,
    pub y_c2: Option<f64>,
    pub y_c3: Option<f64>,
    pub discontinuous: bool,
}

/// Hysteresis edges for each resource level `factor · (ln N)^alpha`.
pub fn phase_diagram(
    curve: &PercolationCurve,
    kind: DistributionKind,
    stddev: Option<f64>,
    model: &RepeaterModel,
    factors: &[f64],
    y_grid: &[f64],
) -> Result<Vec<PhaseRow>> {
    let scale = (curve.node_count as f64).ln().powf(model.alpha());
    let y_c3 = curve.structural_break();
    factors
        .iter()
        .map(|&f| {
            let mean_n = f * scale;
            let lc = LCurve::new(ResourceDistribution::new(kind, mean_n, stddev)?, *model);
            let h = hysteresis(&lc, curve, y_grid)?;
            Ok(PhaseRow {
                mean_n_over_ln_n: f,
                mean_n,
                y_c1: h.y_c1,
                y_c2: h.y_c2,
                y_c3,
                discontinuous: h.discontinuous,
            })
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with columns `mean_n_over_lnN,y_c1,y_c2,y_c3`.
pub fn phase_csv(rows: &[PhaseRow]) -> String {
    let mut out = String::from("mean_n_over_lnN,y_c1,y_c2,y_c3\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.mean_n_over_ln_n,
            cell(r.y_c1),
            cell(r.y_c2),
            cell(r.y_c3)
        );
    }
    out
}

/// Network metrics of one independently generated graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationMetrics {
    pub realization: usize,
    pub y_c3: Option<f64>,
    pub d_max: f64,
    pub alpha_c: Option<f64>,
    pub n_c: Option<f64>,
}

/// Settings shared by every realization in [`realization_metrics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub grid_max: Option<f64>,
    pub grid_step: f64,
    pub runs: usize,
    pub break_fraction: f64,
    pub options: CurveOptions,
}

/// Generates `count` graphs from `topology` (seeds derived from `seed`) and
/// measures a percolation curve on each.
pub fn realization_metrics(
    topology: &TopologyConfig,
    count: usize,
    settings: &SweepSettings,
    model: &RepeaterModel,
    seed: u64,
) -> Result<Vec<RealizationMetrics>> {
    (0..count)
        .map(|r| {
            let tc = topology.with_seed(derive_seed(seed, &[3, r as u64]));
            let g = generate(&tc)?;
            let curve_seed = derive_seed(seed, &[4, r as u64]);
            let max = match settings.grid_max {
                Some(m) => m,
                None => default_grid_max(&g, tc.kind, tc.mean_degree, curve_seed)?,
            };
            let grid = uniform_grid(max, settings.grid_step);
            let curve = measure_curve_opts(&g, &grid, settings.runs, curve_seed, &settings.options)?;
            let y_c3 = estimate_yc3(&curve, settings.break_fraction).ok();
            let profile = DiameterProfile::from_curve(&curve);
            let upto = y_c3.unwrap_or(curve.grid_max() + curve.grid_step());
            Ok(RealizationMetrics {
                realization: r,
                y_c3,
                d_max: d_max(&curve),
                alpha_c: alpha_critical(&profile, upto).ok().filter(|a| a.is_finite()),
                n_c: n_critical(&profile, model, upto).ok(),
            })
        })
        .collect()
}

/// CSV with columns `realization,y_c3,D_max,alpha_c,n_c`.
pub fn realizations_csv(rows: &[RealizationMetrics]) -> String {
    let mut out = String::from("realization,y_c3,D_max,alpha_c,n_c\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.realization,
            cell(r.y_c3),
            r.d_max,
            cell(r.alpha_c),
            cell(r.n_c)
        );
    }
    out
}

/// Gnuplot script for the two CSV artifacts.
pub fn plot_script() -> &'static str {
    "set datafile separator ','\n\
     set key autotitle columnhead\n\
     set terminal pngcairo size 1200,500\n\
     set output 'curves.png'\n\
     set multiplot layout 1,2\n\
     set xlabel 'x+y'\n\
     set ylabel 'mean diameter'\n\
     plot 'percolation.csv' using 1:2 with linespoints\n\
     set ylabel 'mean largest component'\n\
     plot 'percolation.csv' using 1:3 with linespoints\n\
     unset multiplot\n\
     set output 'hysteresis.png'\n\
     set xlabel 'y'\n\
     set ylabel 'backbone size'\n\
     plot 'hysteresis.csv' using 1:4 with points title 'supercritical', \\\n\
     \x20    'hysteresis.csv' using 1:5 with points title 'subcritical'\n"
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageStatus {
    Complete,
    Failed(String),
    Skipped,
}

impl std::fmt::Display for StageStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageStatus::Complete => f.write_str("complete"),
            StageStatus::Failed(m) => write!(f, "failed: {m}"),
            StageStatus::Skipped => f.write_str("skipped"),
        }
    }
}

/// Stages in execution order.
pub const STAGES: [&str; 7] = [
    "graph",
    "resources",
    "percolation",
    "hysteresis",
    "metrics",
    "realizations",
    "plot",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub stages: Vec<(&'static str, StageStatus)>,
    pub metrics: Option<Metrics>,
}

impl ExperimentReport {
    pub fn complete(&self) -> bool {
        !self.stages.iter().any(|(_, s)| matches!(s, StageStatus::Failed(_)))
    }
}

fn write_manifest(cfg: &ExperimentConfig, report: &ExperimentReport, extra: &[(String, String)]) -> Result<()> {
    let mut m = String::new();
    let _ = writeln!(m, "tool={} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "config_sha256={}", report.config_hash);
    m.push_str(&cfg.canonical());
    for (k, v) in extra {
        let _ = writeln!(m, "resolved.{k}={v}");
    }
    for (name, status) in &report.stages {
        let _ = writeln!(m, "stage.{name}={status}");
    }
    let _ = writeln!(
        m,
        "status={}",
        if report.complete() { "complete" } else { "incomplete" }
    );
    fs::write(report.out_dir.join("manifest.txt"), m)?;
    Ok(())
}

struct Pipeline<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
    graph: Option<Graph>,
    curve: Option<PercolationCurve>,
    hyst: Option<HysteresisResult>,
    metrics: Option<Metrics>,
    resolved: Vec<(String, String)>,
}

impl Pipeline<'_> {
    fn stage(&mut self, name: &str) -> Result<()> {
        let cfg = self.cfg;
        let model = cfg.model()?;
        match name {
            "graph" => {
                let g = generate(&cfg.topology_config())?;
                let mut buf = Vec::new();
                write_edge_list(&g, &mut buf)?;
                fs::write(self.dir.join("graph.tsv"), buf)?;
                self.graph = Some(g);
            }
            "resources" => {
                let g = self.graph.as_ref().expect("graph stage ran");
                let res = sample_resources(g, &cfg.distribution()?, derive_seed(cfg.seed, &[1]));
                let mut buf = Vec::new();
                write_resources(g, &res, &mut buf)?;
                fs::write(self.dir.join("resources.tsv"), buf)?;
            }
            "percolation" => {
                let g = self.graph.as_ref().expect("graph stage ran");
                let seed = derive_seed(cfg.seed, &[2]);
                let max = match cfg.grid_max {
                    Some(m) => m,
                    None => default_grid_max(g, cfg.topology, cfg.degree, seed)?,
                };
                self.resolved.push(("grid_max".into(), max.to_string()));
                self.resolved.push(("mean_n".into(), cfg.mean_n().to_string()));
                let grid = uniform_grid(max, cfg.grid_step);
                let curve = measure_curve_opts(g, &grid, cfg.runs, seed, &cfg.curve_options())?;
                fs::write(self.dir.join("percolation.csv"), curve.to_csv())?;
                self.curve = Some(curve);
            }
            "hysteresis" => {
                let curve = self.curve.as_ref().expect("percolation stage ran");
                let lc = LCurve::new(cfg.distribution()?, model);
                let y_grid = uniform_grid(curve.grid_max(), cfg.y_step);
                let h = hysteresis(&lc, curve, &y_grid)?;
                fs::write(self.dir.join("hysteresis.csv"), h.to_csv())?;
                self.hyst = Some(h);
            }
            "metrics" => {
                let curve = self.curve.as_ref().expect("percolation stage ran");
                let m = compute_metrics(curve, cfg.mean_n(), &model, cfg.break_fraction, self.hyst.as_ref())?;
                let mut json = serde_json::to_string_pretty(&m)?;
                json.push('\n');
                fs::write(self.dir.join("metrics.json"), json)?;
                self.metrics = Some(m);
            }
            "realizations" => {
                if cfg.realizations > 1 {
                    let settings = SweepSettings {
                        grid_max: cfg.grid_max,
                        grid_step: cfg.grid_step,
                        runs: cfg.runs,
                        break_fraction: cfg.break_fraction,
                        options: cfg.curve_options(),
                    };
                    let rows = realization_metrics(
                        &cfg.topology_config(),
                        cfg.realizations,
                        &settings,
                        &model,
                        cfg.seed,
                    )?;
                    fs::write(self.dir.join("realizations.csv"), realizations_csv(&rows))?;
                }
            }
            "plot" => fs::write(self.dir.join("plot.gp"), plot_script())?,
            _ => unreachable!("unknown stage {name}"),
        }
        Ok(())
    }
}

/// Runs every stage, writing artifacts into `cfg.out_dir`. A failing stage
/// is recorded in the manifest, later stages are marked skipped and the
/// error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut report = ExperimentReport {
        out_dir: cfg.out_dir.clone(),
        config_hash: cfg.hash(),
        stages: STAGES.iter().map(|&s| (s, StageStatus::Skipped)).collect(),
        metrics: None,
    };
    let mut pipe = Pipeline {
        cfg,
        dir: &cfg.out_dir,
        graph: None,
        curve: None,
        hyst: None,
        metrics: None,
        resolved: Vec::new(),
    };
    let mut failure = None;
    for (i, name) in STAGES.iter().enumerate() {
        match pipe.stage(name) {
            Ok(()) => report.stages[i].1 = StageStatus::Complete,
            Err(e) => {
                report.stages[i].1 = StageStatus::Failed(e.to_string());
                failure = Some(e);
                break;
            }
        }
    }
    report.metrics = pipe.metrics.take();
    write_manifest(cfg, &report, &pipe.resolved)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub problems: Vec<String>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            return f.write_str("PASS");
        }
        writeln!(f, "FAIL")?;
        for p in &self.problems {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

/// Checks a graph file and, if given, a resource file against it. Format and
/// consistency problems become report entries; only I/O failures are errors.
pub fn validate(graph_path: &Path, resources_path: Option<&Path>) -> Result<ValidationReport> {
    let mut problems = Vec::new();
    let graph = match read_edge_list(BufReader::new(fs::File::open(graph_path)?)) {
        Ok(g) => Some(g),
        Err(Error::Io(e)) => return Err(Error::Io(e)),
        Err(e) => {
            problems.push(format!("{}: {e}", graph_path.display()));
            None
        }
    };
    if let (Some(g), Some(path)) = (&graph, resources_path) {
        let text = fs::read_to_string(path)?;
        match parse_resource_lines(text.as_bytes()) {
            Err(e) => problems.push(format!("{}: {e}", path.display())),
            Ok(lines) => {
                if let Err(e) = crate::resources::read_resources(g, text.as_bytes()) {
                    problems.push(format!("{}: {e}", path.display()));
                } else if lines.len() != g.edge_count() {
                    problems.push(format!(
                        "{}: {} resource lines for {} edges",
                        path.display(),
                        lines.len(),
                        g.edge_count()
                    ));
                }
            }
        }
    }
    Ok(ValidationReport {
        passed: problems.is_empty(),
        problems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_canonical_form() {
        let cfg = ExperimentConfig::default();
        let text = cfg.canonical().replace("=unset\n", "=unset_marker\n");
        // unset keys are not valid input; drop them before reparsing
        let input: String = text
            .lines()
            .filter(|l| !l.ends_with("unset_marker") && !l.ends_with("=auto"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(ExperimentConfig::parse(&input).unwrap(), cfg);
    }

    #[test]
    fn parse_rejects_bad_input() {
        for bad in [
            "nodes",
            "nodes = ten",
            "colour = red",
            "nodes = 10\nnodes = 20",
            "mean = 5\nmean_per_ln_n = 3",
            "topology = lattice",
            "runs = 0",
            "diameter = fast",
            "diameter = bounded:2",
            "alpha = -1",
        ] {
            assert!(
                matches!(ExperimentConfig::parse(bad), Err(Error::InvalidConfig(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = ExperimentConfig::default();
        let variants = [
            "topology = ba",
            "nodes = 500",
            "degree = 8",
            "distribution = uniform",
            "mean = 40",
            "mean_per_ln_n = 10",
            "stddev = 2",
            "alpha = 2",
            "grid_max = 3",
            "grid_step = 0.05",
            "y_step = 0.05",
            "runs = 10",
            "seed = 9",
            "break_fraction = 0.05",
            "diameter = bounded:8",
            "realizations = 3",
            "out_dir = elsewhere",
        ];
        let mut hashes = std::collections::HashSet::new();
        hashes.insert(base.hash());
        for v in variants {
            let cfg = ExperimentConfig::parse(v).unwrap();
            assert!(hashes.insert(cfg.hash()), "{v}");
        }
        assert_eq!(ExperimentConfig::parse("").unwrap().hash(), base.hash());
        assert_eq!(ExperimentConfig::parse("# comment\n\nnodes = 10000").unwrap().hash(), base.hash());
    }

    #[test]
    fn mean_resolution() {
        let cfg = ExperimentConfig::parse("nodes = 1000\nalpha = 2\nmean_per_ln_n = 3").unwrap();
        assert!((cfg.mean_n() - 3.0 * 1000f64.ln().powi(2)).abs() < 1e-9);
        let cfg = ExperimentConfig::parse("mean = 42").unwrap();
        assert_eq!(cfg.mean_n(), 42.0);
    }

    fn small(dir: &Path) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "nodes = 300\nruns = 4\ngrid_step = 0.1\ny_step = 0.1\nmean = 30\nout_dir = {}",
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn experiment_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run_experiment(&small(a.path())).unwrap();
        run_experiment(&small(b.path())).unwrap();
        assert!(ra.complete());
        for f in ["graph.tsv", "resources.tsv", "percolation.csv", "hysteresis.csv", "metrics.json", "plot.gp"] {
            let x = fs::read(a.path().join(f)).unwrap();
            let y = fs::read(b.path().join(f)).unwrap();
            assert_eq!(x, y, "{f}");
        }
        let manifest = fs::read_to_string(a.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("status=complete"));
        assert!(manifest.contains(&format!("config_sha256={}", ra.config_hash)));
        assert!(manifest.contains("runs=4"));
        assert!(manifest.contains("break_fraction=0.01"));
        let report = validate(&a.path().join("graph.tsv"), Some(&a.path().join("resources.tsv"))).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn failed_stage_leaves_incomplete_manifest() {
        let dir = tempfile::tempdir().unwrap();
        // a directory squatting on the output file makes the write fail
        fs::create_dir(dir.path().join("percolation.csv")).unwrap();
        let cfg = small(dir.path());
        let err = run_experiment(&cfg);
        assert!(err.is_err());
        let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("status=incomplete"));
        assert!(manifest.contains("stage.graph=complete"));
        assert!(manifest.contains("stage.percolation=failed"));
        assert!(manifest.contains("stage.plot=skipped"));
    }

    #[test]
    fn validate_reports_problems() {
        let dir = tempfile::tempdir().unwrap();
        let g = dir.path().join("g.tsv");
        fs::write(&g, "# nodes=3\n0\t1\n1\t2\n").unwrap();
        let ok = dir.path().join("ok.tsv");
        fs::write(&ok, "0\t1\t3\n1\t2\t4\n").unwrap();
        assert!(validate(&g, Some(&ok)).unwrap().passed);

        let missing = dir.path().join("missing.tsv");
        fs::write(&missing, "0\t1\t3\n").unwrap();
        let r = validate(&g, Some(&missing)).unwrap();
        assert!(!r.passed);
        assert!(r.problems[0].contains("1\t2"), "{r}");

        let negative = dir.path().join("neg.tsv");
        fs::write(&negative, "0\t1\t3\n1\t2\t-4\n").unwrap();
        assert!(!validate(&g, Some(&negative)).unwrap().passed);

        let broken = dir.path().join("broken.tsv");
        fs::write(&broken, "# nodes=3\n0\t1\n1\tx\n").unwrap();
        let r = validate(&broken, None).unwrap();
        assert!(r.problems[0].contains("line 3"), "{r}");
    }

    #[test]
    fn analytic_metrics_for_er() {
        let a = ERAnalytic::new(100_000, 6.0).unwrap();
        let model = RepeaterModel::new(1.0).unwrap();
        let m = analytic_metrics(&a, 1e6, &model, 0.02).unwrap();
        assert!((m.y_c3.unwrap() - 6f64.ln()).abs() < 1e-12);
        assert!(m.y_increasing);
        assert!(m.n_c.unwrap() > 0.0);
    }

    #[test]
    fn phase_rows_and_csv() {
        let g = generate(&TopologyConfig::new(TopologyKind::Er, 400, 6.0, 2)).unwrap();
        let grid = uniform_grid(2.8, 0.05);
        let curve = crate::percolation::measure_curve(&g, &grid, 5, 3).unwrap();
        let model = RepeaterModel::new(1.0).unwrap();
        let rows = phase_diagram(&curve, DistributionKind::Exp, None, &model, &[1.0, 1000.0], &uniform_grid(2.8, 0.05)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(!rows[1].discontinuous);
        let csv = phase_csv(&rows);
        assert!(csv.starts_with("mean_n_over_lnN,y_c1,y_c2,y_c3\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
