//! Seeded generators for the three topologies studied: Erdős–Rényi,
//! Barabási–Albert and random geometric graphs.
//!
//! The Barabási–Albert generator grows from a clique on `m + 1` nodes and
//! resamples repeated targets within one node's attachment round. That keeps
//! the graph simple, unlike the strict linearised-chord (Bollobás) model,
//! which allows multi-edges.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Er,
    Ba,
    Rgg,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            TopologyKind::Er => "er",
            TopologyKind::Ba => "ba",
            TopologyKind::Rgg => "rgg",
        })
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(TopologyKind::Er),
            "ba" | "sf" => Ok(TopologyKind::Ba),
            "rgg" => Ok(TopologyKind::Rgg),
            other => Err(Error::InvalidConfig(format!("unknown topology {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    pub node_count: usize,
    pub mean_degree: f64,
    pub seed: u64,
}

impl TopologyConfig {
    pub fn new(kind: TopologyKind, node_count: usize, mean_degree: f64, seed: u64) -> Self {
        Self {
            kind,
            node_count,
            mean_degree,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::InvalidConfig("node count must be positive".into()));
        }
        if !(self.mean_degree > 0.0) || !self.mean_degree.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "mean degree must be positive, got {}",
                self.mean_degree
            )));
        }
        match self.kind {
            TopologyKind::Er => {
                er_probability(self).map(|_| ())
            }
            TopologyKind::Ba => {
                let m = ba_links_per_node(self)?;
                if self.node_count <= m {
                    return Err(Error::InvalidConfig(format!(
                        "BA needs more than m = {m} nodes, got {}",
                        self.node_count
                    )));
                }
                Ok(())
            }
            TopologyKind::Rgg => rgg_radius(self).map(|_| ()),
        }
    }
}

/// Dispatches on `cfg.kind`.
pub fn generate(cfg: &TopologyConfig) -> Result<Graph> {
    match cfg.kind {
        TopologyKind::Er => gen_er(cfg),
        TopologyKind::Ba => gen_ba(cfg),
        TopologyKind::Rgg => gen_rgg(cfg),
    }
}

fn er_probability(cfg: &TopologyConfig) -> Result<f64> {
    if cfg.node_count < 2 {
        return Err(Error::InvalidConfig("ER needs at least two nodes".into()));
    }
    let p = cfg.mean_degree / (cfg.node_count - 1) as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "link probability c/(N-1) = {p} outside (0, 1]"
        )));
    }
    Ok(p)
}

/// G(N, p) with p = c/(N-1), sampled by geometric skipping over node pairs.
pub fn gen_er(cfg: &TopologyConfig) -> Result<Graph> {
    let p = er_probability(cfg)?;
    let n = cfg.node_count as u64;
    let mut edges = Vec::with_capacity((p * (n * (n - 1)) as f64 / 2.0 * 1.05) as usize + 8);
    if p >= 1.0 {
        for v in 1..n as u32 {
            for w in 0..v {
                edges.push((w, v));
            }
        }
        return Ok(Graph::from_edges_unchecked(cfg.node_count, edges));
    }
    let mut rng = seed::rng(cfg.seed);
    let log_q = (1.0 - p).ln();
    let mut v: u64 = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as u32, v as u32));
        }
    }
    Ok(Graph::from_edges_unchecked(cfg.node_count, edges))
}

fn ba_links_per_node(cfg: &TopologyConfig) -> Result<usize> {
    let c = cfg.mean_degree;
    if c.fract() != 0.0 || c < 2.0 || (c as u64) % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "BA mean degree must be an even positive integer (c = 2m), got {c}"
        )));
    }
    Ok(c as usize / 2)
}

/// Preferential attachment with `m = c/2` links per new node.
pub fn gen_ba(cfg: &TopologyConfig) -> Result<Graph> {
    let m = ba_links_per_node(cfg)?;
    let n = cfg.node_count;
    if n <= m {
        return Err(Error::InvalidConfig(format!(
            "BA needs more than m = {m} nodes, got {n}"
        )));
    }
    let mut rng = seed::rng(cfg.seed);
    let mut edges = Vec::with_capacity(m * n);
    // every edge contributes both endpoints, so a uniform draw is degree-proportional
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * n);
    for v in 0..=m as u32 {
        for u in 0..v {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in (m + 1) as u32..n as u32 {
        chosen.clear();
        while chosen.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Ok(Graph::from_edges_unchecked(n, edges))
}

fn rgg_radius(cfg: &TopologyConfig) -> Result<f64> {
    let r = (cfg.mean_degree / (std::f64::consts::PI * cfg.node_count as f64)).sqrt();
    if r >= 0.5 {
        return Err(Error::InvalidConfig(format!(
            "connection radius {r} exceeds half the torus width"
        )));
    }
    Ok(r)
}

/// Uniform points on the unit torus, linked when their periodic distance is
/// at most r = sqrt(c / (pi N)).
pub fn gen_rgg(cfg: &TopologyConfig) -> Result<Graph> {
    let r = rgg_radius(cfg)?;
    let mut rng = seed::rng(cfg.seed);
    let points: Vec<(f64, f64)> = (0..cfg.node_count)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    gen_rgg_from_points(&points, r)
}

fn torus_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Geometric graph on given torus points. Edges come out sorted.
pub fn gen_rgg_from_points(points: &[(f64, f64)], radius: f64) -> Result<Graph> {
    if !(radius >= 0.0 && radius < 0.5) {
        return Err(Error::InvalidConfig(format!(
            "connection radius {radius} must lie in [0, 0.5)"
        )));
    }
    let n = points.len();
    let r2 = radius * radius;
    let close = |i: usize, j: usize| {
        let dx = torus_delta(points[i].0, points[j].0);
        let dy = torus_delta(points[i].1, points[j].1);
        dx * dx + dy * dy <= r2
    };
    let mut edges = Vec::new();
    let cells = if radius > 0.0 {
        (1.0 / radius).floor() as usize
    } else {
        usize::MAX
    };
    if cells < 3 || n < 64 {
        for i in 0..n {
            for j in i + 1..n {
                if close(i, j) {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        return Ok(Graph::from_edges_unchecked(n, edges));
    }
    let cells = cells.min(1 << 12);
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in points.iter().enumerate() {
        buckets[cell_of(y) * cells + cell_of(x)].push(i as u32);
    }
    for (i, &(x, y)) in points.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for dy in [cells - 1, 0, 1] {
            for dx in [cells - 1, 0, 1] {
                let b = ((cy + dy) % cells) * cells + (cx + dx) % cells;
                for &j in &buckets[b] {
                    if j as usize > i && close(i, j as usize) {
                        edges.push((i as u32, j));
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_edges_unchecked(n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    fn cfg(kind: TopologyKind, n: usize, c: f64, seed: u64) -> TopologyConfig {
        TopologyConfig::new(kind, n, c, seed)
    }

    fn assert_simple(g: &Graph) {
        Graph::new(g.node_count(), g.edges().to_vec()).expect("generator output is a simple graph");
    }

    #[test]
    fn er_two_nodes_probability_one() {
        let g = gen_er(&cfg(TopologyKind::Er, 2, 1.0, 3)).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        let (n, c) = (10_000usize, 6.0);
        let g = gen_er(&cfg(TopologyKind::Er, n, c, 11)).unwrap();
        assert_simple(&g);
        let p = c / (n - 1) as f64;
        let mean = n as f64 * c / 2.0;
        let sigma = (mean * (1.0 - p)).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() < 3.0 * sigma, "{}", g.edge_count());
    }

    #[test]
    fn er_rejects_probability_above_one() {
        assert!(gen_er(&cfg(TopologyKind::Er, 3, 2.5, 0)).is_err());
        assert!(gen_er(&cfg(TopologyKind::Er, 1, 1.0, 0)).is_err());
    }

    #[test]
    fn generators_are_seeded() {
        for kind in [TopologyKind::Er, TopologyKind::Ba, TopologyKind::Rgg] {
            let a = generate(&cfg(kind, 2000, 6.0, 42)).unwrap();
            let b = generate(&cfg(kind, 2000, 6.0, 42)).unwrap();
            let c = generate(&cfg(kind, 2000, 6.0, 43)).unwrap();
            assert_eq!(a, b);
            assert_ne!(a.edges(), c.edges());
        }
    }

    #[test]
    fn ba_edge_count_and_structure() {
        let g = gen_ba(&cfg(TopologyKind::Ba, 10, 6.0, 5)).unwrap();
        assert_eq!(g.edge_count(), 6 + 3 * 6);
        assert_simple(&g);

        let g = gen_ba(&cfg(TopologyKind::Ba, 5000, 6.0, 9)).unwrap();
        assert_simple(&g);
        assert!((0..5000).all(|v| g.degree(v) >= 3));
        assert_eq!(connected_components(&g).largest_size, 5000);
    }

    #[test]
    fn ba_rejects_bad_parameters() {
        assert!(gen_ba(&cfg(TopologyKind::Ba, 100, 5.0, 0)).is_err());
        assert!(gen_ba(&cfg(TopologyKind::Ba, 100, 6.5, 0)).is_err());
        assert!(gen_ba(&cfg(TopologyKind::Ba, 3, 6.0, 0)).is_err());
    }

    #[test]
    fn rgg_mean_degree_within_three_sigma() {
        let (n, c) = (10_000usize, 6.0);
        let g = gen_rgg(&cfg(TopologyKind::Rgg, n, c, 17)).unwrap();
        assert_simple(&g);
        // pair indicators are pairwise independent on the torus
        let expected = c * (n - 1) as f64 / n as f64;
        let sigma = (2.0 * c / n as f64).sqrt();
        assert!((g.mean_degree() - expected).abs() < 3.0 * sigma, "{}", g.mean_degree());
    }

    #[test]
    fn rgg_coincident_points_form_a_clique() {
        let pts = vec![(0.3, 0.7); 4];
        let g = gen_rgg_from_points(&pts, 0.49).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn rgg_small_seed_search_finds_clique() {
        // N = 4 with r = 0.49: look for a seed whose points are pairwise close
        let c = 0.49f64.powi(2) * std::f64::consts::PI * 4.0;
        let hit = (0..200u64)
            .map(|s| gen_rgg(&cfg(TopologyKind::Rgg, 4, c, s)).unwrap())
            .find(|g| g.edge_count() == 6);
        assert!(hit.is_some());
    }

    #[test]
    fn rgg_wraps_around_the_torus() {
        let g = gen_rgg_from_points(&[(0.01, 0.5), (0.99, 0.5), (0.5, 0.5)], 0.05).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn rgg_grid_matches_brute_force() {
        let mut rng = seed::rng(1);
        let pts: Vec<(f64, f64)> = (0..3000).map(|_| (rng.random(), rng.random())).collect();
        let fast = gen_rgg_from_points(&pts, 0.03).unwrap();
        let mut brute = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let dx = torus_delta(pts[i].0, pts[j].0);
                let dy = torus_delta(pts[i].1, pts[j].1);
                if dx * dx + dy * dy <= 0.03 * 0.03 {
                    brute.push((i as u32, j as u32));
                }
            }
        }
        assert_eq!(fast.edges(), &brute[..]);
    }

    #[test]
    fn rgg_rejects_large_radius() {
        assert!(gen_rgg(&cfg(TopologyKind::Rgg, 4, 4.0, 0)).is_err());
    }
}
