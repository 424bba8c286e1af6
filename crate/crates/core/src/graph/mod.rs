//! Undirected simple graphs, connected components and exact diameters.
//!
//! Nodes are dense indices `0..node_count`. Edges keep the order in which
//! they were supplied, which is also the order per-edge data (resources,
//! percolation draws) is aligned with.

mod diameter;
mod io;

use std::collections::HashSet;

use crate::error::{Error, Result};

pub use diameter::{diameter, exact_diameter, fast_diameter, EXACT_DIAMETER_LIMIT};
pub(crate) use diameter::Workspace;
pub use io::{read_edge_list, write_edge_list};
pub(crate) use io::parse_pair as io_parse_pair;

/// Anything a breadth-first search can walk over.
pub trait Adjacency {
    fn node_count(&self) -> usize;
    fn for_each_neighbor<F: FnMut(u32)>(&self, v: u32, f: F);
}

/// Undirected simple graph with array-backed adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn new(node_count: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::NodeOutOfRange { u, v, node_count });
            }
            if u == v {
                return Err(Error::SelfLoop(u, v));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
        }
        Ok(Self::from_edges_unchecked(node_count, edges))
    }

    /// Builds a graph from edges already known to satisfy the invariants.
    pub(crate) fn from_edges_unchecked(node_count: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut degree = vec![0usize; node_count + 1];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut acc = 0;
        offsets.push(0);
        for d in &degree[..node_count] {
            acc += d;
            offsets.push(acc);
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; acc];
        for &(u, v) in &edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Self {
            node_count,
            edges,
            offsets,
            neighbors,
        }
    }

    /// Graph with `node_count` nodes and no edges.
    pub fn empty(node_count: usize) -> Self {
        Self::from_edges_unchecked(node_count, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn mean_degree(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.node_count as f64
    }

    /// Subgraph on the same node set keeping the edges for which `keep` holds.
    /// `keep` receives the edge index and its endpoints.
    pub fn filter_edges<F>(&self, mut keep: F) -> Graph
    where
        F: FnMut(usize, u32, u32) -> bool,
    {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, &(u, v))| keep(*i, u, v))
            .map(|(_, &e)| e)
            .collect();
        Self::from_edges_unchecked(self.node_count, edges)
    }
}

impl Adjacency for Graph {
    fn node_count(&self) -> usize {
        self.node_count
    }

    fn for_each_neighbor<F: FnMut(u32)>(&self, v: u32, mut f: F) {
        for &w in self.neighbors(v) {
            f(w);
        }
    }
}

/// Connected-component labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentResult {
    /// Component id per node. Ids are assigned in order of each component's
    /// smallest node.
    pub labels: Vec<u32>,
    /// Size of each component, indexed by label.
    pub sizes: Vec<usize>,
    /// Label of the largest component; ties go to the lowest label.
    pub largest_label: u32,
    pub largest_size: usize,
}

impl ComponentResult {
    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    /// Sorted nodes carrying `label`.
    pub fn members(&self, label: u32) -> Vec<u32> {
        (0..self.labels.len() as u32)
            .filter(|&v| self.labels[v as usize] == label)
            .collect()
    }
}

pub fn connected_components<A: Adjacency>(g: &A) -> ComponentResult {
    let n = g.node_count();
    let mut labels = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for root in 0..n as u32 {
        if labels[root as usize] != u32::MAX {
            continue;
        }
        let label = sizes.len() as u32;
        labels[root as usize] = label;
        stack.push(root);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            g.for_each_neighbor(v, |w| {
                if labels[w as usize] == u32::MAX {
                    labels[w as usize] = label;
                    stack.push(w);
                }
            });
        }
        sizes.push(size);
    }
    let (largest_label, largest_size) = sizes
        .iter()
        .enumerate()
        .fold((0u32, 0usize), |best, (i, &s)| {
            if s > best.1 {
                (i as u32, s)
            } else {
                best
            }
        });
    ComponentResult {
        labels,
        sizes,
        largest_label,
        largest_size,
    }
}

/// The largest connected component together with its diameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargestComponent {
    pub nodes: Vec<u32>,
    pub size: usize,
    pub diameter: u32,
}

/// Largest component (ties broken towards the component holding the smallest
/// node index) and its exact diameter. An empty graph yields size 0.
pub fn largest_component<A: Adjacency>(g: &A) -> LargestComponent {
    if g.node_count() == 0 {
        return LargestComponent {
            nodes: Vec::new(),
            size: 0,
            diameter: 0,
        };
    }
    let comps = connected_components(g);
    let nodes = comps.members(comps.largest_label);
    let diameter = diameter(g, &nodes).expect("a labelled component is connected");
    LargestComponent {
        size: nodes.len(),
        nodes,
        diameter,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn path(n: u32) -> Graph {
        Graph::new(n as usize, (1..n).map(|i| (i - 1, i)).collect()).unwrap()
    }

    pub fn cycle(n: u32) -> Graph {
        Graph::new(n as usize, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap()
    }

    pub fn complete(n: u32) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::new(n as usize, edges).unwrap()
    }

    pub fn star(leaves: u32) -> Graph {
        Graph::new(leaves as usize + 1, (1..=leaves).map(|i| (0, i)).collect()).unwrap()
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(Graph::new(3, vec![(1, 1)]), Err(Error::SelfLoop(1, 1))));
        assert!(matches!(
            Graph::new(3, vec![(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            Graph::new(3, vec![(0, 3)]),
            Err(Error::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn components_of_small_graphs() {
        let p = path(3);
        let c = connected_components(&p);
        assert_eq!(c.component_count(), 1);
        assert_eq!(c.largest_size, 3);

        let c = connected_components(&Graph::empty(4));
        assert_eq!(c.component_count(), 4);
        assert_eq!(c.largest_size, 1);

        let two_triangles =
            Graph::new(6, vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        let c = connected_components(&two_triangles);
        assert_eq!(c.component_count(), 2);
        assert_eq!(c.largest_size, 3);
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn largest_component_ties_go_to_lowest_node() {
        // path of 3 on {3,4,5} and triangle on {0,1,2}: the triangle wins
        let g = Graph::new(6, vec![(3, 4), (4, 5), (0, 1), (1, 2), (0, 2)]).unwrap();
        let lc = largest_component(&g);
        assert_eq!(lc.nodes, vec![0, 1, 2]);
        assert_eq!(lc.diameter, 1);
    }

    #[test]
    fn filter_keeps_node_set() {
        let g = complete(4);
        let h = g.filter_edges(|i, _, _| i % 2 == 0);
        assert_eq!(h.node_count(), 4);
        assert_eq!(h.edge_count(), 3);
    }
}
