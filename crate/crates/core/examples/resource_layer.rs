//! Samples entangled-pair counts and tabulates the affordable distance L(x)
//! for each resource distribution.

use quantum_backbone::netgen::{generate, TopologyConfig, TopologyKind};
use quantum_backbone::resources::{
    sample_resources, DistributionKind, LCurve, RepeaterModel, ResourceDistribution,
};

fn main() -> quantum_backbone::Result<()> {
    let g = generate(&TopologyConfig::new(TopologyKind::Er, 2_000, 6.0, 1))?;
    let model = RepeaterModel::new(1.0)?;
    let kinds = [
        DistributionKind::Exp,
        DistributionKind::Uniform,
        DistributionKind::Poisson,
        DistributionKind::Gauss,
    ];

    for kind in kinds {
        let dist = ResourceDistribution::new(kind, 50.0, None)?;
        let res = sample_resources(&g, &dist, 7);
        let mean = res.pairs().iter().sum::<f64>() / res.len() as f64;
        println!("{kind:<8} sampled mean {mean:.2} over {} links", res.len());
    }

    println!("\n   x   {}", kinds.map(|k| format!("{k:>9}")).join(""));
    for i in 0..=10 {
        let x = 0.25 * f64::from(i);
        let row: Vec<String> = kinds
            .iter()
            .map(|&k| {
                let lc = LCurve::new(ResourceDistribution::new(k, 50.0, None).unwrap(), model);
                format!("{:>9.2}", lc.eval(x).unwrap())
            })
            .collect();
        println!("{x:5.2} {}", row.join(""));
    }
    Ok(())
}
