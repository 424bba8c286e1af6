//! Prunes a small resourced network down to its backbone and checks every
//! backbone pair against the exhaustive path search.

use quantum_backbone::backbone::{compute_backbone, functional_oracle, prune};
use quantum_backbone::graph::Graph;
use quantum_backbone::resources::{RepeaterModel, ResourceAssignment};

fn main() -> quantum_backbone::Result<()> {
    // two triangles joined by a weak bridge, plus a thin tail
    let edges = vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5), (5, 6), (6, 7)];
    let pairs = vec![9.0, 8.0, 7.0, 1.0, 6.0, 9.0, 5.0, 2.0, 1.0];
    let g = Graph::new(8, edges)?;
    let res = ResourceAssignment::new(&g, pairs)?;

    for alpha in [0.5, 1.0, 2.0] {
        let model = RepeaterModel::new(alpha)?;
        let b = compute_backbone(&g, &res, &model)?;
        println!(
            "alpha {alpha}: l_fixed {:.2}, n_fixed {:.2}, backbone {:?}, diameter {}",
            b.l_fixed, b.n_fixed, b.backbone_nodes, b.diameter
        );
        let mut sound = true;
        for (i, &u) in b.backbone_nodes.iter().enumerate() {
            for &v in &b.backbone_nodes[i + 1..] {
                sound &= functional_oracle(&g, &res, &model, u, v)?;
            }
        }
        println!("  every backbone pair functionally connected: {sound}");
    }

    let model = RepeaterModel::new(1.0)?;
    let kept = prune(&g, &res, 5.0, &model);
    println!("links with at least 5 pairs: {:?}", kept.edges());
    Ok(())
}
