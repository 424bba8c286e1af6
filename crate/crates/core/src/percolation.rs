//! Random-failure Monte Carlo: the mean diameter D(x+y) and mean size S(x+y)
//! of the largest component when links survive with probability e^{-(x+y)}.
//!
//! Each run draws one uniform number per edge (or per node) and reuses it for
//! every gridpoint, so within a run the surviving edge set at a lower
//! retention probability is a subset of the one at a higher probability.
//! A run therefore sweeps the grid from the most damaged end, merging edges
//! into a union-find, and measures the diameter on a thresholded view of a
//! weight-sorted adjacency structure without rebuilding any graph.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Graph, Workspace, EXACT_DIAMETER_LIMIT};
use crate::seed;

/// Default giant-component fraction below which the network counts as broken.
pub const DEFAULT_BREAK_FRACTION: f64 = 0.01;
pub const DEFAULT_GRID_STEP: f64 = 0.02;
pub const DEFAULT_RUNS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureMode {
    /// Links fail independently.
    #[default]
    Bond,
    /// Nodes fail independently and take their links with them.
    Node,
}

/// How the diameter of each percolated largest component is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum DiameterMethod {
    /// Exact diameter every time.
    #[default]
    Exact,
    /// Stop bound refinement after `max_bfs` breadth-first sweeps and keep the
    /// lower bound reached. Sweeps start from peripheral nodes, so the bound
    /// is usually the diameter; [`PercolationCurve::certified`] counts the runs
    /// where that is proven.
    Bounded { max_bfs: usize },
    /// Largest-component sizes only; diameters are reported as 0.
    Skip,
}

/// Knobs for [`measure_curve_opts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CurveOptions {
    pub mode: FailureMode,
    pub diameter: DiameterMethod,
}

/// Keeps each edge independently with probability `p`.
pub fn bond_percolate(g: &Graph, p: f64, seed: u64) -> Graph {
    let mut rng = seed::rng(seed);
    let draws: Vec<f64> = (0..g.edge_count()).map(|_| rng.random()).collect();
    g.filter_edges(|i, _, _| draws[i] < p)
}

/// Keeps each node independently with probability `p`. Removed nodes stay as
/// isolated nodes so indices are unchanged.
pub fn node_percolate(g: &Graph, p: f64, seed: u64) -> Graph {
    let mut rng = seed::rng(seed);
    let draws: Vec<f64> = (0..g.node_count()).map(|_| rng.random()).collect();
    g.filter_edges(|_, u, v| draws[u as usize] < p && draws[v as usize] < p)
}

/// Mean largest-component diameter and size over a grid of x+y values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationCurve {
    pub grid: Vec<f64>,
    pub mean_d: Vec<f64>,
    pub mean_s: Vec<f64>,
    pub std_d: Vec<f64>,
    pub std_s: Vec<f64>,
    pub runs: usize,
    pub node_count: usize,
    /// Runs per gridpoint whose diameter is proven exact. Equals `runs`
    /// everywhere under [`DiameterMethod::Exact`].
    pub certified: Vec<usize>,
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.is_empty() || x < xs[0] || x > *xs.last().unwrap() || x.is_nan() {
        return None;
    }
    let k = xs.partition_point(|&g| g <= x);
    if k == xs.len() {
        return Some(*ys.last().unwrap());
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    Some(ys[k - 1] + t * (ys[k] - ys[k - 1]))
}

impl PercolationCurve {
    /// Linearly interpolated mean diameter; `None` outside the grid.
    pub fn diameter_at(&self, x_plus_y: f64) -> Option<f64> {
        interpolate(&self.grid, &self.mean_d, x_plus_y)
    }

    /// Linearly interpolated mean largest-component size.
    pub fn size_at(&self, x_plus_y: f64) -> Option<f64> {
        interpolate(&self.grid, &self.mean_s, x_plus_y)
    }

    pub fn grid_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Index of the diameter peak (first one on ties).
    pub fn peak_index(&self) -> usize {
        self.mean_d
            .iter()
            .enumerate()
            .fold(0, |best, (i, &d)| if d > self.mean_d[best] { i } else { best })
    }

    pub fn peak_location(&self) -> f64 {
        self.grid[self.peak_index()]
    }

    /// Grid spacing, taken as the smallest gap between gridpoints.
    pub fn grid_step(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Structural break point with the default 1% giant-component threshold.
    pub fn structural_break(&self) -> Option<f64> {
        estimate_yc3(self, DEFAULT_BREAK_FRACTION).ok()
    }

    /// Same curve restricted to every `factor`-th gridpoint.
    pub fn subsample(&self, factor: usize) -> PercolationCurve {
        let pick = |v: &[f64]| v.iter().step_by(factor.max(1)).copied().collect::<Vec<_>>();
        PercolationCurve {
            grid: pick(&self.grid),
            mean_d: pick(&self.mean_d),
            mean_s: pick(&self.mean_s),
            std_d: pick(&self.std_d),
            std_s: pick(&self.std_s),
            runs: self.runs,
            node_count: self.node_count,
            certified: self.certified.iter().step_by(factor.max(1)).copied().collect(),
        }
    }

    /// CSV with columns `x_plus_y,mean_D,mean_S,std_D,std_S,runs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_plus_y,mean_D,mean_S,std_D,std_S,runs\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.grid[i], self.mean_d[i], self.mean_s[i], self.std_d[i], self.std_s[i], self.runs
            ));
        }
        out
    }

    /// True when every diameter behind the curve is proven exact.
    pub fn fully_certified(&self) -> bool {
        self.certified.iter().all(|&c| c == self.runs)
    }
}

/// `0, step, 2 step, ...` up to and including `max` (within rounding).
pub fn uniform_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Adjacency with per-arc weights sorted ascending, so that the arcs active
/// below a threshold form a prefix of every neighbour list.
struct WeightedAdjacency {
    offsets: Vec<usize>,
    arcs: Vec<(f64, u32)>,
}

impl WeightedAdjacency {
    fn new(g: &Graph, weights: &[f64]) -> Self {
        let n = g.node_count();
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in g.edges() {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut arcs = vec![(0.0, 0u32); offsets[n]];
        for (&(u, v), &w) in g.edges().iter().zip(weights) {
            arcs[fill[u as usize]] = (w, v);
            fill[u as usize] += 1;
            arcs[fill[v as usize]] = (w, u);
            fill[v as usize] += 1;
        }
        for i in 0..n {
            arcs[offsets[i]..offsets[i + 1]].sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        }
        Self { offsets, arcs }
    }
}

/// Arcs of a [`WeightedAdjacency`] with weight strictly below `p`.
struct Below<'a> {
    adj: &'a WeightedAdjacency,
    p: f64,
}

impl Adjacency for Below<'_> {
    fn node_count(&self) -> usize {
        self.adj.offsets.len() - 1
    }

    fn for_each_neighbor<F: FnMut(u32)>(&self, v: u32, mut f: F) {
        let v = v as usize;
        for &(w, u) in &self.adj.arcs[self.adj.offsets[v]..self.adj.offsets[v + 1]] {
            if w >= self.p {
                break;
            }
            f(u);
        }
    }
}

/// Union-find tracking the largest set, ties broken towards the smallest node.
struct Clusters {
    parent: Vec<u32>,
    size: Vec<u32>,
    min_node: Vec<u32>,
    best_size: u32,
    best_min: u32,
}

impl Clusters {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            min_node: (0..n as u32).collect(),
            best_size: if n > 0 { 1 } else { 0 },
            best_min: 0,
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let p = self.parent[v as usize];
            self.parent[v as usize] = self.parent[p as usize];
            v = p;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.min_node[ra as usize] = self.min_node[ra as usize].min(self.min_node[rb as usize]);
        let (s, m) = (self.size[ra as usize], self.min_node[ra as usize]);
        if s > self.best_size || (s == self.best_size && m < self.best_min) {
            self.best_size = s;
            self.best_min = m;
        }
    }
}

fn run_draws(g: &Graph, mode: FailureMode, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    match mode {
        FailureMode::Bond => (0..g.edge_count()).map(|_| rng.random()).collect(),
        FailureMode::Node => {
            let node: Vec<f64> = (0..g.node_count()).map(|_| rng.random()).collect();
            g.edges()
                .iter()
                .map(|&(u, v)| node[u as usize].max(node[v as usize]))
                .collect()
        }
    }
}

/// Per gridpoint of one run: largest size, its diameter, certified flag.
type RunPoint = (u32, u32, bool);

/// One coupled run over the grid.
fn single_run(g: &Graph, retention: &[f64], opts: &CurveOptions, seed: u64) -> Vec<RunPoint> {
    let weights = run_draws(g, opts.mode, seed);
    let adj = WeightedAdjacency::new(g, &weights);
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_unstable_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));

    let mut clusters = Clusters::new(g.node_count());
    let mut ws = Workspace::new(g.node_count());
    let mut added = 0;
    let mut out = vec![(0, 0, true); retention.len()];
    // retention is non-increasing along the grid, so walk it backwards
    for k in (0..retention.len()).rev() {
        let p = retention[k];
        while added < order.len() && weights[order[added]] < p {
            let (u, v) = g.edges()[order[added]];
            clusters.union(u, v);
            added += 1;
        }
        let size = clusters.best_size;
        let (diameter, exact) = if size <= 1 {
            (0, true)
        } else {
            let view = Below { adj: &adj, p };
            if opts.diameter == DiameterMethod::Skip {
                (0, false)
            } else if size as usize <= EXACT_DIAMETER_LIMIT {
                (ws.all_pairs_diameter(&view, clusters.best_min), true)
            } else {
                match opts.diameter {
                    DiameterMethod::Exact => (ws.ifub_diameter(&view, clusters.best_min), true),
                    DiameterMethod::Bounded { max_bfs } => {
                        ws.ifub_bounded(&view, clusters.best_min, max_bfs)
                    }
                    DiameterMethod::Skip => unreachable!(),
                }
            }
        };
        out[k] = (size, diameter, exact);
    }
    out
}

fn sample_std(sum: u64, sum_sq: u128, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n128 = n as u128;
    let num = n128 * sum_sq - (sum as u128) * (sum as u128);
    (num as f64 / (n128 * (n128 - 1)) as f64).sqrt()
}

/// Shared Monte Carlo driver; `grid` only needs to be ascending.
pub(crate) fn sample_grid(
    g: &Graph,
    grid: &[f64],
    runs: usize,
    seed: u64,
    opts: &CurveOptions,
) -> Result<PercolationCurve> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be positive".into()));
    }
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument("grid must be non-empty, finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly ascending".into()));
    }
    let retention: Vec<f64> = grid.iter().map(|x| (-x).exp()).collect();
    let per_run: Vec<Vec<RunPoint>> = (0..runs)
        .into_par_iter()
        .map(|r| single_run(g, &retention, opts, seed::derive_seed(seed, &[r as u64])))
        .collect();

    let m = grid.len();
    let mut curve = PercolationCurve {
        grid: grid.to_vec(),
        mean_d: vec![0.0; m],
        mean_s: vec![0.0; m],
        std_d: vec![0.0; m],
        std_s: vec![0.0; m],
        runs,
        node_count: g.node_count(),
        certified: vec![0; m],
    };
    for k in 0..m {
        let (mut sd, mut ss, mut sd2, mut ss2) = (0u64, 0u64, 0u128, 0u128);
        for run in &per_run {
            let (s, d, exact) = run[k];
            curve.certified[k] += usize::from(exact);
            ss += u64::from(s);
            sd += u64::from(d);
            ss2 += u128::from(s) * u128::from(s);
            sd2 += u128::from(d) * u128::from(d);
        }
        curve.mean_s[k] = ss as f64 / runs as f64;
        curve.mean_d[k] = sd as f64 / runs as f64;
        curve.std_s[k] = sample_std(ss, ss2, runs);
        curve.std_d[k] = sample_std(sd, sd2, runs);
    }
    Ok(curve)
}

/// Bond-percolation curve over `grid` (ascending, starting at 0) with exact
/// diameters.
pub fn measure_curve(g: &Graph, grid: &[f64], runs: usize, seed: u64) -> Result<PercolationCurve> {
    measure_curve_opts(g, grid, runs, seed, &CurveOptions::default())
}

pub fn measure_curve_with(
    g: &Graph,
    grid: &[f64],
    runs: usize,
    seed: u64,
    mode: FailureMode,
) -> Result<PercolationCurve> {
    let opts = CurveOptions {
        mode,
        ..CurveOptions::default()
    };
    measure_curve_opts(g, grid, runs, seed, &opts)
}

pub fn measure_curve_opts(
    g: &Graph,
    grid: &[f64],
    runs: usize,
    seed: u64,
    opts: &CurveOptions,
) -> Result<PercolationCurve> {
    if grid.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("grid must start at 0".into()));
    }
    if let DiameterMethod::Bounded { max_bfs } = opts.diameter {
        if max_bfs < 5 {
            return Err(Error::InvalidArgument(format!(
                "bounded diameters need at least 5 sweeps, got {max_bfs}"
            )));
        }
    }
    sample_grid(g, grid, runs, seed, opts)
}

/// Smallest x+y at which the mean giant-component fraction drops below
/// `fraction_threshold`, interpolated linearly between gridpoints.
pub fn estimate_yc3(curve: &PercolationCurve, fraction_threshold: f64) -> Result<f64> {
    if !(fraction_threshold > 0.0 && fraction_threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction threshold must lie in (0, 1), got {fraction_threshold}"
        )));
    }
    let n = curve.node_count as f64;
    let k = curve
        .mean_s
        .iter()
        .position(|&s| s / n < fraction_threshold)
        .ok_or(Error::GridTooShort)?;
    if k == 0 {
        return Ok(curve.grid[0]);
    }
    let (f0, f1) = (curve.mean_s[k - 1] / n, curve.mean_s[k] / n);
    let (x0, x1) = (curve.grid[k - 1], curve.grid[k]);
    Ok(x0 + (f0 - fraction_threshold) / (f0 - f1) * (x1 - x0))
}

/// Largest mean diameter over the grid.
pub fn d_max(curve: &PercolationCurve) -> f64 {
    curve.mean_d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Where a coarse, cheap sweep finds the giant component gone. Used to size
/// the grid for topologies without a known threshold.
pub fn prescan_break(g: &Graph, seed: u64) -> Result<f64> {
    let coarse = uniform_grid(12.0, 0.1);
    let opts = CurveOptions {
        diameter: DiameterMethod::Skip,
        ..CurveOptions::default()
    };
    let curve = measure_curve_opts(g, &coarse, 10, seed, &opts)?;
    estimate_yc3(&curve, DEFAULT_BREAK_FRACTION)
}

/// Default upper end of the x+y grid: `ln c + 1` for ER and RGG, and one
/// past a pre-scanned break point for BA.
pub fn default_grid_max(
    g: &Graph,
    kind: crate::netgen::TopologyKind,
    mean_degree: f64,
    seed: u64,
) -> Result<f64> {
    use crate::netgen::TopologyKind;
    match kind {
        TopologyKind::Er | TopologyKind::Rgg => Ok(mean_degree.ln() + 1.0),
        TopologyKind::Ba => Ok(prescan_break(g, seed::derive_seed(seed, &[u64::MAX]))? + 1.0),
    }
}
