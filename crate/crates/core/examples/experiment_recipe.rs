//! Runs a small recipe end to end and lists the artifacts it leaves behind.

use quantum_backbone::experiment::{run_experiment, ExperimentConfig};

const RECIPE: &str = "
# ER network with the resource level scaled to the network size
topology = er
nodes = 2000
degree = 6
distribution = exp
mean_per_ln_n = 15
alpha = 1
runs = 20
seed = 7
";

fn main() -> quantum_backbone::Result<()> {
    let dir = std::env::temp_dir().join("qnet-recipe");
    let mut cfg = ExperimentConfig::parse(RECIPE)?;
    cfg.out_dir = dir.clone();
    let report = run_experiment(&cfg)?;

    println!("config sha256 {}", report.config_hash);
    for (stage, status) in &report.stages {
        println!("  {stage:<13} {status}");
    }
    if let Some(m) = &report.metrics {
        println!("y_c1 {:?}, y_c2 {:?}, y_c3 {:?}", m.y_c1, m.y_c2, m.y_c3);
    }
    let mut files: Vec<_> = std::fs::read_dir(&dir)?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    files.sort();
    println!("artifacts in {}: {files:?}", dir.display());
    Ok(())
}
