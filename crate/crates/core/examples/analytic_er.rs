//! The Erdős–Rényi diameter approximation and the critical quantities it implies.

use quantum_backbone::analytics::{cstar, er_diameter, ERAnalytic};
use quantum_backbone::experiment::analytic_metrics;
use quantum_backbone::resources::RepeaterModel;

fn main() -> quantum_backbone::Result<()> {
    for c in [1.5, 2.0, 6.0, 10.0] {
        println!("c* of {c:<4} = {:.6}", cstar(c)?);
    }

    let a = ERAnalytic::new(100_000, 6.0)?;
    println!("\nN = 1e5, c = 6, pole at x+y = {:.4}", a.threshold());
    for i in 0..=8 {
        let x = 0.25 * f64::from(i);
        match er_diameter(&a, x) {
            Ok(d) => println!("  D({x:.2}) = {d:.2}"),
            Err(e) => println!("  D({x:.2}): {e}"),
        }
    }

    let mean = 15.0 * (1e5f64).ln();
    let m = analytic_metrics(&a, mean, &RepeaterModel::new(1.0)?, 0.02)?;
    println!("\n{}", serde_json::to_string_pretty(&m)?);
    Ok(())
}
