use quantum_backbone::graph::connected_components;
use quantum_backbone::netgen::{generate, TopologyConfig, TopologyKind};

/// Least-squares slope of log CCDF against log degree over degrees 10..=100.
fn ccdf_slope(degrees: &[usize]) -> f64 {
    let total = degrees.len() as f64;
    let max = *degrees.iter().max().unwrap();
    let mut counts = vec![0usize; max + 2];
    for &k in degrees {
        counts[k] += 1;
    }
    // counts[k] becomes the number of degrees >= k
    for k in (0..=max).rev() {
        counts[k] += counts[k + 1];
    }
    let pts: Vec<(f64, f64)> = (10..=100)
        .filter(|&k| k <= max && counts[k] > 0)
        .map(|k| ((k as f64).ln(), (counts[k] as f64 / total).ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

#[test]
fn ba_degree_tail_has_cubic_exponent() {
    let mut degrees = Vec::new();
    for seed in 0..100 {
        let g = generate(&TopologyConfig::new(TopologyKind::Ba, 100_000, 6.0, seed)).unwrap();
        degrees.extend((0..g.node_count() as u32).map(|v| g.degree(v)));
    }
    let slope = ccdf_slope(&degrees);
    assert!((-2.2..=-1.8).contains(&slope), "CCDF slope {slope}");
}

#[test]
fn ba_is_connected_with_minimum_degree_m() {
    for seed in 0..5 {
        let g = generate(&TopologyConfig::new(TopologyKind::Ba, 5_000, 8.0, seed)).unwrap();
        assert!((0..5_000).all(|v| g.degree(v) >= 4));
        assert_eq!(connected_components(&g).component_count(), 1);
    }
}

#[test]
fn mean_degree_converges_for_er_and_rgg() {
    for kind in [TopologyKind::Er, TopologyKind::Rgg] {
        for nodes in [1_000, 10_000, 100_000] {
            let g = generate(&TopologyConfig::new(kind, nodes, 6.0, 5)).unwrap();
            // generous 3σ bound: Var(2E/N) ≤ 2c/N for Poisson edge counts
            let sigma = (2.0 * 6.0 / nodes as f64).sqrt();
            let k = g.mean_degree();
            assert!((k - 6.0).abs() < 3.0 * sigma, "{kind} N={nodes}: {k}");
        }
    }
}
