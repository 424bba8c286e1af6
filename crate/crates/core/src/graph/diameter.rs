//! Exact diameters of connected components.
//!
//! [`exact_diameter`] runs a BFS from every node. [`fast_diameter`] returns the
//! same value using the iFUB scheme: a 4-sweep picks a central node `u` and
//! a lower bound, then fringe levels of the BFS tree rooted at `u` are
//! processed from the outside in. Once the lower bound exceeds twice the
//! next level index no farther pair can exist.

use super::Adjacency;
use crate::error::{Error, Result};

/// Components up to this size use all-pairs BFS in [`diameter`].
pub const EXACT_DIAMETER_LIMIT: usize = 64;

const UNSEEN: u32 = u32::MAX;

/// Reusable BFS buffers sized to the node count.
pub(crate) struct Workspace {
    dist: Vec<u32>,
    parent: Vec<u32>,
    order: Vec<u32>,
    arcs: usize,
}

impl Workspace {
    pub(crate) fn new(node_count: usize) -> Self {
        Self {
            dist: vec![UNSEEN; node_count],
            parent: vec![UNSEEN; node_count],
            order: Vec::with_capacity(node_count),
            arcs: 0,
        }
    }

    fn clear(&mut self) {
        for &v in &self.order {
            self.dist[v as usize] = UNSEEN;
        }
        self.order.clear();
        self.arcs = 0;
    }

    /// BFS from `src`; returns (eccentricity, a farthest node).
    /// `order` ends up holding the component in nondecreasing distance.
    pub(crate) fn bfs<A: Adjacency>(&mut self, g: &A, src: u32) -> (u32, u32) {
        self.clear();
        self.dist[src as usize] = 0;
        self.parent[src as usize] = src;
        self.order.push(src);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            let next = self.dist[v as usize] + 1;
            let Self {
                dist,
                parent,
                order,
                arcs,
            } = self;
            g.for_each_neighbor(v, |w| {
                *arcs += 1;
                if dist[w as usize] == UNSEEN {
                    dist[w as usize] = next;
                    parent[w as usize] = v;
                    order.push(w);
                }
            });
        }
        let last = *self.order.last().unwrap();
        (self.dist[last as usize], last)
    }

    fn ancestor(&self, mut v: u32, steps: u32) -> u32 {
        for _ in 0..steps {
            v = self.parent[v as usize];
        }
        v
    }

    /// Checks that `nodes` is exactly the component reached from its first node.
    fn check_component<A: Adjacency>(&mut self, g: &A, nodes: &[u32]) -> Result<()> {
        let first = *nodes.first().ok_or(Error::EmptyComponent)?;
        self.bfs(g, first);
        let all_reached = nodes.iter().all(|&v| self.dist[v as usize] != UNSEEN);
        if !all_reached || self.order.len() != nodes.len() {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    /// All-pairs BFS over the component containing `start`.
    pub(crate) fn all_pairs_diameter<A: Adjacency>(&mut self, g: &A, start: u32) -> u32 {
        self.bfs(g, start);
        let members = self.order.clone();
        members
            .iter()
            .map(|&v| self.bfs(g, v).0)
            .max()
            .unwrap_or(0)
    }

    /// iFUB over the component containing `start`.
    pub(crate) fn ifub_diameter<A: Adjacency>(&mut self, g: &A, start: u32) -> u32 {
        self.ifub_bounded(g, start, usize::MAX).0
    }

    /// iFUB that gives up after `max_bfs` sweeps. Returns the best lower
    /// bound found and whether it is certified to be the diameter.
    pub(crate) fn ifub_bounded<A: Adjacency>(&mut self, g: &A, start: u32, max_bfs: usize) -> (u32, bool) {
        let (ecc0, far0) = self.bfs(g, start);
        let size = self.order.len();
        if size <= 2 {
            return (ecc0, true);
        }
        let is_tree = self.arcs / 2 == size - 1;

        let (ecc_a, far_a) = self.bfs(g, far0);
        if is_tree {
            // a double sweep is exact on trees
            return (ecc_a, true);
        }
        let mut lb = ecc0.max(ecc_a);
        let mid = self.ancestor(far_a, ecc_a / 2);
        let (ecc_m, far_m) = self.bfs(g, mid);
        let (ecc_b, far_b) = self.bfs(g, far_m);
        lb = lb.max(ecc_m).max(ecc_b);
        let center = self.ancestor(far_b, ecc_b / 2);
        let (ecc_u, _) = self.bfs(g, center);
        lb = lb.max(ecc_u);
        let mut used = 5usize;

        let levels: Vec<(u32, u32)> = self
            .order
            .iter()
            .map(|&v| (v, self.dist[v as usize]))
            .collect();
        let mut end = levels.len();
        let mut level = ecc_u;
        let mut ub = 2 * ecc_u;
        while ub > lb && level > 0 {
            let mut start = end;
            while start > 0 && levels[start - 1].1 == level {
                start -= 1;
            }
            for &(v, _) in &levels[start..end] {
                if used >= max_bfs {
                    return (lb, false);
                }
                used += 1;
                lb = lb.max(self.bfs(g, v).0);
                if lb >= ub {
                    return (lb, true);
                }
            }
            if lb > 2 * (level - 1) {
                return (lb, true);
            }
            ub = 2 * (level - 1);
            level -= 1;
            end = start;
        }
        (lb, true)
    }
}

/// Diameter by all-pairs BFS. Fails if `component` is empty or is not a
/// single connected component of `g`.
pub fn exact_diameter<A: Adjacency>(g: &A, component: &[u32]) -> Result<u32> {
    let mut ws = Workspace::new(g.node_count());
    ws.check_component(g, component)?;
    Ok(ws.all_pairs_diameter(g, component[0]))
}

/// Diameter by eccentricity bounding; always equal to [`exact_diameter`].
pub fn fast_diameter<A: Adjacency>(g: &A, component: &[u32]) -> Result<u32> {
    let mut ws = Workspace::new(g.node_count());
    ws.check_component(g, component)?;
    Ok(ws.ifub_diameter(g, component[0]))
}

/// Picks all-pairs BFS for small components and iFUB otherwise.
pub fn diameter<A: Adjacency>(g: &A, component: &[u32]) -> Result<u32> {
    let mut ws = Workspace::new(g.node_count());
    ws.check_component(g, component)?;
    if component.len() <= EXACT_DIAMETER_LIMIT {
        Ok(ws.all_pairs_diameter(g, component[0]))
    } else {
        Ok(ws.ifub_diameter(g, component[0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{complete, cycle, path, star};
    use crate::graph::{connected_components, Graph};
    use proptest::prelude::*;

    fn all(g: &Graph) -> Vec<u32> {
        (0..g.node_count() as u32).collect()
    }

    #[test]
    fn known_diameters() {
        assert_eq!(exact_diameter(&complete(4), &all(&complete(4))).unwrap(), 1);
        assert_eq!(exact_diameter(&path(5), &all(&path(5))).unwrap(), 4);
        assert_eq!(exact_diameter(&cycle(6), &all(&cycle(6))).unwrap(), 3);
        assert_eq!(fast_diameter(&path(5), &all(&path(5))).unwrap(), 4);
        assert_eq!(fast_diameter(&star(10), &all(&star(10))).unwrap(), 2);
        assert_eq!(fast_diameter(&cycle(7), &all(&cycle(7))).unwrap(), 3);
    }

    #[test]
    fn singleton_has_zero_diameter() {
        let g = Graph::empty(3);
        assert_eq!(exact_diameter(&g, &[1]).unwrap(), 0);
        assert_eq!(fast_diameter(&g, &[1]).unwrap(), 0);
    }

    #[test]
    fn rejects_disconnected_sets() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert!(matches!(exact_diameter(&g, &[0, 1, 2, 3]), Err(Error::Disconnected)));
        assert!(matches!(fast_diameter(&g, &[0, 2]), Err(Error::Disconnected)));
        assert!(matches!(fast_diameter(&g, &[]), Err(Error::EmptyComponent)));
        // a proper subset of a component is not a component either
        assert!(matches!(exact_diameter(&g, &[0]), Err(Error::Disconnected)));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..200, 0.0f64..0.08, any::<u64>()).prop_map(|(n, p, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    if rng.random::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            Graph::new(n, edges).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn fast_matches_exact(g in arb_graph()) {
            let comps = connected_components(&g);
            for label in 0..comps.component_count() as u32 {
                let nodes = comps.members(label);
                prop_assert_eq!(
                    fast_diameter(&g, &nodes).unwrap(),
                    exact_diameter(&g, &nodes).unwrap()
                );
            }
        }

        #[test]
        fn removing_an_edge_never_shrinks_a_connected_diameter(g in arb_graph(), pick in any::<usize>()) {
            prop_assume!(g.edge_count() > 0);
            let lc = crate::graph::largest_component(&g);
            let drop = pick % g.edge_count();
            let h = g.filter_edges(|i, _, _| i != drop);
            if let Ok(d) = exact_diameter(&h, &lc.nodes) {
                prop_assert!(d >= lc.diameter);
            }
        }

        #[test]
        fn components_ignore_edge_order(g in arb_graph(), rot in any::<usize>()) {
            let mut edges = g.edges().to_vec();
            if !edges.is_empty() {
                let k = rot % edges.len();
                edges.rotate_left(k);
                edges.reverse();
            }
            let h = Graph::new(g.node_count(), edges).unwrap();
            let a = connected_components(&g);
            prop_assert_eq!(&a, &connected_components(&h));
            prop_assert_eq!(&a, &connected_components(&g));
        }
    }
}
