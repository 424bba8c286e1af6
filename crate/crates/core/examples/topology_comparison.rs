//! Compares robustness metrics of ER, BA and RGG networks averaged over
//! independent realizations.

use quantum_backbone::experiment::{realization_metrics, SweepSettings};
use quantum_backbone::netgen::{TopologyConfig, TopologyKind};
use quantum_backbone::percolation::{CurveOptions, DEFAULT_BREAK_FRACTION};
use quantum_backbone::resources::RepeaterModel;

fn main() -> quantum_backbone::Result<()> {
    let settings = SweepSettings {
        grid_max: None,
        grid_step: 0.02,
        runs: 10,
        break_fraction: DEFAULT_BREAK_FRACTION,
        options: CurveOptions::default(),
    };
    let model = RepeaterModel::new(1.0)?;
    println!("model  alpha_c  y_c3   D_max");
    for kind in [TopologyKind::Ba, TopologyKind::Er, TopologyKind::Rgg] {
        let topo = TopologyConfig::new(kind, 2_000, 6.0, 0);
        let rows = realization_metrics(&topo, 5, &settings, &model, 17)?;
        let avg = |f: &dyn Fn(&_) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
        println!(
            "{kind:<6} {:<8.3} {:<6.3} {:.1}",
            avg(&|r| r.alpha_c.unwrap_or(f64::INFINITY)),
            avg(&|r| r.y_c3.unwrap_or(f64::NAN)),
            avg(&|r| r.d_max)
        );
    }
    Ok(())
}
