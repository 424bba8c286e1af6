//! Builds one graph of each model and prints its basic shape.

use quantum_backbone::graph::largest_component;
use quantum_backbone::netgen::{generate, TopologyConfig, TopologyKind};

fn main() -> quantum_backbone::Result<()> {
    println!("model  nodes  edges  <k>    k_max  giant  diameter");
    for kind in [TopologyKind::Er, TopologyKind::Ba, TopologyKind::Rgg] {
        let g = generate(&TopologyConfig::new(kind, 5_000, 6.0, 42))?;
        let k_max = (0..g.node_count() as u32).map(|v| g.degree(v)).max().unwrap_or(0);
        let lc = largest_component(&g);
        println!(
            "{kind:<6} {:<6} {:<6} {:<6.3} {:<6} {:<6} {}",
            g.node_count(),
            g.edge_count(),
            g.mean_degree(),
            k_max,
            lc.nodes.len(),
            lc.diameter
        );
    }
    Ok(())
}
