//! Fixed-point sweep on an ER network: the connected and fragmented
//! solutions coexist between y_c2 and y_c1.

use quantum_backbone::backbone::hysteresis;
use quantum_backbone::netgen::{generate, TopologyConfig, TopologyKind};
use quantum_backbone::percolation::{measure_curve, uniform_grid};
use quantum_backbone::resources::{LCurve, RepeaterModel, ResourceDistribution};

fn main() -> quantum_backbone::Result<()> {
    let nodes = 3_000;
    let g = generate(&TopologyConfig::new(TopologyKind::Er, nodes, 6.0, 3))?;
    let grid = uniform_grid(6f64.ln() + 1.0, 0.02);
    let curve = measure_curve(&g, &grid, 30, 11)?;

    for alpha in [1.0, 2.0] {
        let mean = (15.0 * (nodes as f64).ln()).powf(alpha);
        let lc = LCurve::new(ResourceDistribution::exponential(mean)?, RepeaterModel::new(alpha)?);
        let h = hysteresis(&lc, &curve, &grid)?;
        println!(
            "alpha {alpha}: <n> = {mean:.0}, y_c2 = {:?}, y_c1 = {:?}, overlap {:.2}",
            h.y_c2,
            h.y_c1,
            h.overlap_width()
        );
        for r in h.rows.iter().filter(|r| r.x0_super.is_some() && r.x0_sub.is_some()) {
            println!(
                "  y {:.2}: S_super {:.0}  S_sub {:.0}",
                r.y,
                r.s_super.unwrap_or(0.0),
                r.s_sub.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
