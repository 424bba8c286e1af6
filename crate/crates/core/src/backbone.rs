//! The quantum backbone and the functional fixed point.
//!
//! Pruning every link with fewer than `l^alpha` pairs leaves a graph in which
//! any two nodes of a component whose diameter is at most `l` can be joined
//! at the target fidelity. The backbone is the largest such component.
//!
//! At network scale the same trade-off is expressed through two curves:
//! L(x), the distance affordable when links meet their threshold with
//! probability e^{-x}, and D(x+y), the diameter left after additional random
//! failures e^{-y}. Their intersections, classified by which side of the
//! diameter peak they fall on, give the supercritical (giant backbone) and
//! subcritical branches; overlap of the two branches over `y` is hysteresis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{connected_components, Adjacency, Graph, Workspace, EXACT_DIAMETER_LIMIT};
use crate::percolation::{sample_grid, CurveOptions, DiameterMethod, PercolationCurve};
use crate::resources::{LCurve, RepeaterModel, ResourceAssignment};

/// Largest graph [`functional_oracle`] will enumerate.
pub const ORACLE_NODE_LIMIT: usize = 12;

/// Keeps exactly the edges holding at least `l_fixed^alpha` pairs. The
/// comparison allows a relative 1e-12 of rounding so that feeding back a
/// computed `l_fixed = n^(1/alpha)` keeps the edges holding `n`.
pub fn prune(g: &Graph, res: &ResourceAssignment, l_fixed: f64, model: &RepeaterModel) -> Graph {
    let threshold = model.threshold(l_fixed) * (1.0 - 1e-12);
    prune_at(g, res, threshold)
}

fn prune_at(g: &Graph, res: &ResourceAssignment, threshold: f64) -> Graph {
    let pairs = res.pairs();
    g.filter_edges(|i, _, _| pairs[i] >= threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackboneResult {
    pub l_fixed: f64,
    /// `l_fixed^alpha`, the per-link pair requirement.
    pub n_fixed: f64,
    /// Sorted backbone nodes.
    pub backbone_nodes: Vec<u32>,
    pub backbone_size: usize,
    pub diameter: u32,
    pub pruned_graph: Graph,
}

impl BackboneResult {
    fn empty(node_count: usize) -> Self {
        Self {
            l_fixed: 0.0,
            n_fixed: 0.0,
            backbone_nodes: Vec::new(),
            backbone_size: 0,
            diameter: 0,
            pruned_graph: Graph::empty(node_count),
        }
    }
}

/// Adjacency with arcs sorted by descending pair count, viewed at a threshold.
struct ResourceAdjacency {
    offsets: Vec<usize>,
    arcs: Vec<(f64, u32)>,
}

impl ResourceAdjacency {
    fn new(g: &Graph, pairs: &[f64]) -> Self {
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
        for (&(u, v), &w) in g.edges().iter().zip(pairs) {
            arcs[fill[u as usize]] = (w, v);
            fill[u as usize] += 1;
            arcs[fill[v as usize]] = (w, u);
            fill[v as usize] += 1;
        }
        for i in 0..n {
            arcs[offsets[i]..offsets[i + 1]].sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        }
        Self { offsets, arcs }
    }
}

struct AtLeast<'a> {
    adj: &'a ResourceAdjacency,
    threshold: f64,
}

impl Adjacency for AtLeast<'_> {
    fn node_count(&self) -> usize {
        self.adj.offsets.len() - 1
    }

    fn for_each_neighbor<F: FnMut(u32)>(&self, v: u32, mut f: F) {
        let v = v as usize;
        for &(w, u) in &self.adj.arcs[self.adj.offsets[v]..self.adj.offsets[v + 1]] {
            if w < self.threshold {
                break;
            }
            f(u);
        }
    }
}

/// Largest component per threshold, computed by adding edges in order of
/// decreasing pair count. Returns (size, smallest node) per threshold.
fn largest_per_threshold(g: &Graph, pairs: &[f64], thresholds: &[f64]) -> Vec<(usize, u32)> {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_unstable_by(|&a, &b| pairs[b].total_cmp(&pairs[a]).then(a.cmp(&b)));
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut size = vec![1usize; n];
    let mut min_node: Vec<u32> = (0..n as u32).collect();
    let (mut best_size, mut best_min) = (1usize, 0u32);
    fn find(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            let p = parent[v as usize];
            parent[v as usize] = parent[p as usize];
            v = p;
        }
        v
    }
    let mut out = vec![(0, 0); thresholds.len()];
    let mut added = 0;
    for k in (0..thresholds.len()).rev() {
        while added < order.len() && pairs[order[added]] >= thresholds[k] {
            let (u, v) = g.edges()[order[added]];
            added += 1;
            let (mut a, mut b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                continue;
            }
            if size[a as usize] < size[b as usize] {
                std::mem::swap(&mut a, &mut b);
            }
            parent[b as usize] = a;
            size[a as usize] += size[b as usize];
            min_node[a as usize] = min_node[a as usize].min(min_node[b as usize]);
            let (s, m) = (size[a as usize], min_node[a as usize]);
            if s > best_size || (s == best_size && m < best_min) {
                best_size = s;
                best_min = m;
            }
        }
        out[k] = (best_size, best_min);
    }
    out
}

/// Scans every threshold at which the pruned graph changes and keeps the one
/// whose largest component has diameter `d` with `d^alpha <= n_fixed`
/// (that is `d <= l_fixed`). Among feasible thresholds the largest backbone
/// wins, then the largest `l_fixed`. Returns an empty backbone if no pruned
/// graph with at least one link qualifies.
pub fn compute_backbone(
    g: &Graph,
    res: &ResourceAssignment,
    model: &RepeaterModel,
) -> Result<BackboneResult> {
    let alpha = model.alpha();
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument("backbone needs alpha > 0".into()));
    }
    if res.len() != g.edge_count() {
        return Err(Error::InvalidArgument("resources do not match graph edges".into()));
    }
    let pairs = res.pairs();
    let mut thresholds: Vec<f64> = std::iter::once(0.0).chain(pairs.iter().copied()).collect();
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();

    let largest = largest_per_threshold(g, pairs, &thresholds);
    let adj = ResourceAdjacency::new(g, pairs);
    let mut ws = Workspace::new(g.node_count());
    let feasible = |d: u32, t: f64| f64::from(d).powf(alpha) <= t;

    let mut chosen: Option<(usize, u32)> = None;
    for (k, &t) in thresholds.iter().enumerate() {
        let (size, rep) = largest[k];
        if size < 2 {
            break;
        }
        if let Some((c, _)) = chosen {
            if size < largest[c].0 {
                break;
            }
        }
        let view = AtLeast { adj: &adj, threshold: t };
        // one sweep bounds the diameter between ecc and 2 * ecc
        let (ecc, _) = ws.bfs(&view, rep);
        if !feasible(ecc, t) {
            continue;
        }
        let d = if size <= EXACT_DIAMETER_LIMIT {
            ws.all_pairs_diameter(&view, rep)
        } else {
            ws.ifub_diameter(&view, rep)
        };
        if feasible(d, t) {
            chosen = Some((k, d));
        }
    }

    let Some((k, d)) = chosen else {
        return Ok(BackboneResult::empty(g.node_count()));
    };
    let t = thresholds[k];
    let pruned = prune_at(g, res, t);
    let comps = connected_components(&pruned);
    let nodes = comps.members(comps.labels[largest[k].1 as usize]);
    Ok(BackboneResult {
        l_fixed: if t == 0.0 { 0.0 } else { t.powf(1.0 / alpha) },
        n_fixed: t,
        backbone_size: nodes.len(),
        backbone_nodes: nodes,
        diameter: d,
        pruned_graph: pruned,
    })
}

/// Exhaustive check that some simple path from `u` to `v` of length `l` has
/// at least `l^alpha` pairs on every link. Exponential in the node count, so
/// refused above [`ORACLE_NODE_LIMIT`] nodes.
pub fn functional_oracle(
    g: &Graph,
    res: &ResourceAssignment,
    model: &RepeaterModel,
    u: u32,
    v: u32,
) -> Result<bool> {
    let n = g.node_count();
    if n > ORACLE_NODE_LIMIT {
        return Err(Error::TooLargeForOracle {
            nodes: n,
            limit: ORACLE_NODE_LIMIT,
        });
    }
    if u as usize >= n || v as usize >= n {
        return Err(Error::InvalidArgument(format!("node out of range 0..{n}")));
    }
    if u == v {
        return Ok(true);
    }
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &p) in g.edges().iter().zip(res.pairs()) {
        adj[a as usize].push((b, p));
        adj[b as usize].push((a, p));
    }
    fn search(
        adj: &[Vec<(u32, f64)>],
        alpha: f64,
        at: u32,
        target: u32,
        len: u32,
        min_pairs: f64,
        on_path: &mut [bool],
    ) -> bool {
        for &(w, p) in &adj[at as usize] {
            if on_path[w as usize] {
                continue;
            }
            let len = len + 1;
            let min_pairs = min_pairs.min(p);
            // longer extensions need even more pairs on a no-larger minimum
            if min_pairs < f64::from(len).powf(alpha) {
                continue;
            }
            if w == target {
                return true;
            }
            on_path[w as usize] = true;
            let found = search(adj, alpha, w, target, len, min_pairs, on_path);
            on_path[w as usize] = false;
            if found {
                return true;
            }
        }
        false
    }
    let mut on_path = vec![false; n];
    on_path[u as usize] = true;
    Ok(search(&adj, model.alpha(), u, v, 0, f64::INFINITY, &mut on_path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Supercritical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolution {
    pub x0: f64,
    pub regime: Regime,
    /// Mean largest-component size at x0 + y, read off the curve.
    pub backbone_size: f64,
}

/// Roots of L(x) = D(x + y) for x in (0, grid_max - y], with D interpolated
/// linearly on the curve. Empty once `y` reaches the structural break.
pub fn fixed_points(lcurve: &LCurve, curve: &PercolationCurve, y: f64) -> Result<Vec<FixedPointSolution>> {
    fixed_points_with_break(lcurve, curve, y, curve.structural_break())
}

fn fixed_points_with_break(
    lcurve: &LCurve,
    curve: &PercolationCurve,
    y: f64,
    structural_break: Option<f64>,
) -> Result<Vec<FixedPointSolution>> {
    if !(y >= 0.0) {
        return Err(Error::InvalidArgument(format!("y must be non-negative, got {y}")));
    }
    let x_max = curve.grid_max() - y;
    if x_max <= 0.0 || structural_break.is_some_and(|b| y >= b) {
        return Ok(Vec::new());
    }
    let f = |x: f64| -> Result<f64> {
        let d = curve.diameter_at((x + y).min(curve.grid_max())).unwrap_or(0.0);
        Ok(lcurve.eval(x)? - d)
    };
    let h = curve.grid_step() / 8.0;
    let steps = (x_max / h).ceil() as usize;
    let peak = curve.peak_location();

    let mut roots = Vec::new();
    let mut a = 0.0;
    let mut fa = f(a)?;
    for i in 1..=steps {
        let b = if i == steps { x_max } else { i as f64 * h };
        let fb = f(b)?;
        if (fa > 0.0) != (fb > 0.0) {
            let (mut lo, mut hi, lo_pos) = (a, b, fa > 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (f(mid)? > 0.0) == lo_pos {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x0 = 0.5 * (lo + hi);
            let xt = x0 + y;
            roots.push(FixedPointSolution {
                x0,
                regime: if xt < peak {
                    Regime::Supercritical
                } else {
                    Regime::Subcritical
                },
                backbone_size: curve.size_at(xt.min(curve.grid_max())).unwrap_or(0.0),
            });
        }
        a = b;
        fa = fb;
    }
    Ok(roots)
}

/// Monte Carlo mean largest-component size at retention e^{-(x0 + y)}.
pub fn backbone_size_at(g: &Graph, x0: f64, y: f64, runs: usize, seed: u64) -> Result<f64> {
    let opts = CurveOptions {
        diameter: DiameterMethod::Skip,
        ..CurveOptions::default()
    };
    let curve = sample_grid(g, &[x0 + y], runs, seed, &opts)?;
    Ok(curve.mean_s[0])
}

/// Fixed points at one value of `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisRow {
    pub y: f64,
    /// Smallest supercritical root (the large-backbone branch).
    pub x0_super: Option<f64>,
    /// Largest subcritical root.
    pub x0_sub: Option<f64>,
    pub s_super: Option<f64>,
    pub s_sub: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisResult {
    /// Last `y` with a supercritical solution.
    pub y_c1: Option<f64>,
    /// First `y` with a subcritical solution.
    pub y_c2: Option<f64>,
    pub discontinuous: bool,
    pub rows: Vec<HysteresisRow>,
}

impl HysteresisResult {
    /// Width of the bistable window, zero when the transition is continuous.
    pub fn overlap_width(&self) -> f64 {
        match (self.discontinuous, self.y_c1, self.y_c2) {
            (true, Some(a), Some(b)) => a - b,
            _ => 0.0,
        }
    }

    /// CSV with columns `y,x0_super,x0_sub,S_super,S_sub`; absent values are empty.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("y,x0_super,x0_sub,S_super,S_sub\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.y,
                cell(r.x0_super),
                cell(r.x0_sub),
                cell(r.s_super),
                cell(r.s_sub)
            ));
        }
        out
    }
}

/// Sweeps `y` and locates the edges of the bistable window.
pub fn hysteresis(lcurve: &LCurve, curve: &PercolationCurve, y_grid: &[f64]) -> Result<HysteresisResult> {
    if y_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("y grid must be ascending".into()));
    }
    let cutoff = curve.structural_break();
    let rows = y_grid
        .par_iter()
        .map(|&y| {
            let sols = fixed_points_with_break(lcurve, curve, y, cutoff)?;
            let sup = sols.iter().find(|s| s.regime == Regime::Supercritical);
            let sub = sols.iter().rev().find(|s| s.regime == Regime::Subcritical);
            Ok(HysteresisRow {
                y,
                x0_super: sup.map(|s| s.x0),
                x0_sub: sub.map(|s| s.x0),
                s_super: sup.map(|s| s.backbone_size),
                s_sub: sub.map(|s| s.backbone_size),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let y_c1 = rows.iter().rev().find(|r| r.x0_super.is_some()).map(|r| r.y);
    let y_c2 = rows.iter().find(|r| r.x0_sub.is_some()).map(|r| r.y);
    let discontinuous = matches!((y_c1, y_c2), (Some(a), Some(b)) if b < a);
    Ok(HysteresisResult {
        y_c1,
        y_c2,
        discontinuous,
        rows,
    })
}
