//! The quantum resource layer: entangled pairs per link, the per-link cost of
//! spanning `l` hops, and the curve L(x) giving the reachable distance when a
//! link meets the resource threshold with probability e^{-x}.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::{erf::erfc, gamma::gamma_lr};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Repeater protocol efficiency: spanning `l` links costs `l^alpha` pairs per link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeaterModel {
    alpha: f64,
}

impl RepeaterModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "repeater exponent must be finite and non-negative, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Pairs needed on every link of an `l`-hop path.
    pub fn required_pairs(&self, l: u32) -> Result<f64> {
        if l < 1 {
            return Err(Error::InvalidArgument("path length must be at least 1".into()));
        }
        Ok(f64::from(l).powf(self.alpha))
    }

    /// Resource threshold `l^alpha` for a real-valued distance; zero maps to zero.
    pub fn threshold(&self, l: f64) -> f64 {
        if l == 0.0 {
            0.0
        } else {
            l.powf(self.alpha)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResourceDistribution {
    Exponential { mean: f64 },
    /// Uniform on `[0, 2 * mean]`.
    Uniform { mean: f64 },
    /// Integer Poisson draws used as reals.
    Poisson { mean: f64 },
    /// Normal(mean, stddev) truncated at zero; `mean` is the pre-truncation mean.
    Gaussian { mean: f64, stddev: f64 },
}

/// Distribution family without its parameters, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Exp,
    Uniform,
    Poisson,
    Gauss,
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(Self::Exp),
            "uniform" => Ok(Self::Uniform),
            "poisson" => Ok(Self::Poisson),
            "gauss" | "gaussian" => Ok(Self::Gauss),
            other => Err(Error::InvalidConfig(format!("unknown distribution {other:?}"))),
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Exp => "exp",
            Self::Uniform => "uniform",
            Self::Poisson => "poisson",
            Self::Gauss => "gauss",
        })
    }
}

impl ResourceDistribution {
    /// Builds and validates a distribution. A missing Gaussian stddev defaults to `mean / 3`.
    pub fn new(kind: DistributionKind, mean: f64, stddev: Option<f64>) -> Result<Self> {
        let dist = match kind {
            DistributionKind::Exp => Self::Exponential { mean },
            DistributionKind::Uniform => Self::Uniform { mean },
            DistributionKind::Poisson => Self::Poisson { mean },
            DistributionKind::Gauss => Self::Gaussian {
                mean,
                stddev: stddev.unwrap_or(mean / 3.0),
            },
        };
        dist.validate()?;
        Ok(dist)
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        Self::new(DistributionKind::Exp, mean, None)
    }

    pub fn validate(&self) -> Result<()> {
        let mean = self.mean();
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::InvalidConfig(format!("mean must be positive, got {mean}")));
        }
        if let Self::Gaussian { stddev, .. } = self {
            if !(*stddev > 0.0) || !stddev.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "stddev must be positive, got {stddev}"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> DistributionKind {
        match self {
            Self::Exponential { .. } => DistributionKind::Exp,
            Self::Uniform { .. } => DistributionKind::Uniform,
            Self::Poisson { .. } => DistributionKind::Poisson,
            Self::Gaussian { .. } => DistributionKind::Gauss,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { mean }
            | Self::Uniform { mean }
            | Self::Poisson { mean }
            | Self::Gaussian { mean, .. } => mean,
        }
    }

    /// P(n >= threshold).
    ///
    /// The Poisson tail is extended to real thresholds through the regularized
    /// lower incomplete gamma function P(t, mean), which equals P(K >= t) at
    /// every integer `t` and is continuous and decreasing in between.
    pub fn survival(&self, threshold: f64) -> f64 {
        if threshold <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Exponential { mean } => (-threshold / mean).exp(),
            Self::Uniform { mean } => (1.0 - threshold / (2.0 * mean)).clamp(0.0, 1.0),
            Self::Poisson { mean } => gamma_lr(threshold, mean),
            Self::Gaussian { mean, stddev } => {
                let z = |t: f64| (t - mean) / (stddev * std::f64::consts::SQRT_2);
                erfc(z(threshold)) / erfc(z(0.0))
            }
        }
    }

    fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential { mean } => Exp::new(1.0 / mean).unwrap().sample(rng),
            Self::Uniform { mean } => rng.random::<f64>() * 2.0 * mean,
            Self::Poisson { mean } => Poisson::new(mean).unwrap().sample(rng),
            Self::Gaussian { mean, stddev } => {
                let normal = Normal::new(mean, stddev).unwrap();
                loop {
                    let v = normal.sample(rng);
                    if v >= 0.0 {
                        break v;
                    }
                }
            }
        }
    }
}

/// Entangled pairs per edge, aligned with [`Graph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceAssignment {
    pairs: Vec<f64>,
}

impl ResourceAssignment {
    pub fn new(g: &Graph, pairs: Vec<f64>) -> Result<Self> {
        if pairs.len() != g.edge_count() {
            return Err(Error::InvalidArgument(format!(
                "{} resource values for {} edges",
                pairs.len(),
                g.edge_count()
            )));
        }
        if let Some(i) = pairs.iter().position(|n| !(*n >= 0.0) || !n.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "edge {i} has invalid pair count {}",
                pairs[i]
            )));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[f64] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// I.i.d. draws from `dist`, one per edge in edge order.
pub fn sample_resources(g: &Graph, dist: &ResourceDistribution, seed: u64) -> ResourceAssignment {
    let mut rng = seed::rng(seed);
    ResourceAssignment {
        pairs: (0..g.edge_count()).map(|_| dist.sample_one(&mut rng)).collect(),
    }
}

/// Writes `u<TAB>v<TAB>n` lines in edge order.
pub fn write_resources<W: Write>(g: &Graph, res: &ResourceAssignment, mut out: W) -> Result<()> {
    for (&(u, v), n) in g.edges().iter().zip(res.pairs()) {
        writeln!(out, "{u}\t{v}\t{n}")?;
    }
    Ok(())
}

/// One parsed line of a resource file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceLine {
    pub line: usize,
    pub u: u32,
    pub v: u32,
    pub pairs: f64,
}

/// Parses resource lines without checking them against a graph.
pub fn parse_resource_lines<R: BufRead>(input: R) -> Result<Vec<ResourceLine>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (u, v) = crate::graph::io_parse_pair(&line, lineno)?;
        let field = line.split('\t').nth(2).ok_or_else(|| Error::Parse {
            line: lineno,
            message: "missing pair count".into(),
        })?;
        let pairs: f64 = field.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad pair count {field:?}"),
        })?;
        out.push(ResourceLine { line: lineno, u, v, pairs });
    }
    Ok(out)
}

/// Reads a resource file that must list the graph's edges in order.
pub fn read_resources<R: BufRead>(g: &Graph, input: R) -> Result<ResourceAssignment> {
    let lines = parse_resource_lines(input)?;
    for (k, rl) in lines.iter().enumerate() {
        match g.edges().get(k) {
            Some(&(u, v)) if (u, v) == (rl.u, rl.v) => {}
            Some(&(u, v)) => {
                return Err(Error::Parse {
                    line: rl.line,
                    message: format!("expected edge {u}\t{v}, found {}\t{}", rl.u, rl.v),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: rl.line,
                    message: "more resource lines than graph edges".into(),
                })
            }
        }
    }
    if lines.len() < g.edge_count() {
        let (u, v) = g.edges()[lines.len()];
        return Err(Error::InvalidArgument(format!("no resource line for edge {u}\t{v}")));
    }
    ResourceAssignment::new(g, lines.iter().map(|l| l.pairs).collect())
}

/// L(x): the distance `l` whose threshold `l^alpha` is met with probability e^{-x}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurve {
    pub dist: ResourceDistribution,
    pub model: RepeaterModel,
}

impl LCurve {
    pub fn new(dist: ResourceDistribution, model: RepeaterModel) -> Self {
        Self { dist, model }
    }

    /// Threshold `t` with `-ln survival(t) = x`.
    pub fn threshold_at(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidArgument(format!("x must be non-negative, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.dist {
            ResourceDistribution::Exponential { mean } => x * mean,
            ResourceDistribution::Uniform { mean } => -2.0 * mean * (-x).exp_m1(),
            _ => invert_survival(&self.dist, x),
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = self.threshold_at(x)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        if self.model.alpha() == 0.0 {
            return Err(Error::InvalidArgument(
                "with alpha = 0 no finite distance corresponds to x > 0".into(),
            ));
        }
        Ok(t.powf(1.0 / self.model.alpha()))
    }
}

/// Free-function form of [`LCurve::eval`].
pub fn l_curve(dist: &ResourceDistribution, model: &RepeaterModel, x: f64) -> Result<f64> {
    LCurve::new(*dist, *model).eval(x)
}

fn invert_survival(dist: &ResourceDistribution, x: f64) -> f64 {
    let h = |t: f64| -dist.survival(t).ln();
    let mut lo = 0.0;
    let mut hi = dist.mean().max(1.0);
    while h(hi) < x {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{complete, path};
    use proptest::prelude::*;

    fn all_dists(mean: f64) -> Vec<ResourceDistribution> {
        [
            DistributionKind::Exp,
            DistributionKind::Uniform,
            DistributionKind::Poisson,
            DistributionKind::Gauss,
        ]
        .into_iter()
        .map(|k| ResourceDistribution::new(k, mean, None).unwrap())
        .collect()
    }

    #[test]
    fn required_pairs_values() {
        assert_eq!(RepeaterModel::new(0.0).unwrap().required_pairs(5).unwrap(), 1.0);
        assert_eq!(RepeaterModel::new(1.0).unwrap().required_pairs(5).unwrap(), 5.0);
        assert_eq!(RepeaterModel::new(2.0).unwrap().required_pairs(3).unwrap(), 9.0);
        assert!(RepeaterModel::new(1.0).unwrap().required_pairs(0).is_err());
        assert!(RepeaterModel::new(-1.0).is_err());
    }

    #[test]
    fn survival_values() {
        for d in all_dists(10.0) {
            assert_eq!(d.survival(0.0), 1.0);
        }
        let exp = ResourceDistribution::exponential(10.0).unwrap();
        assert!((exp.survival(10.0) - (-1.0f64).exp()).abs() < 1e-15);
        let uni = ResourceDistribution::new(DistributionKind::Uniform, 10.0, None).unwrap();
        assert_eq!(uni.survival(25.0), 0.0);
        assert_eq!(uni.survival(5.0), 0.75);
    }

    #[test]
    fn poisson_survival_matches_tail_sum_at_integers() {
        let lambda = 7.5f64;
        let d = ResourceDistribution::new(DistributionKind::Poisson, lambda, None).unwrap();
        let mut pmf = (-lambda).exp();
        let mut cdf = 0.0;
        for k in 0..30u32 {
            // P(K >= k) = 1 - P(K <= k - 1)
            let tail = 1.0 - cdf;
            assert!((d.survival(f64::from(k)) - tail).abs() < 1e-12, "k = {k}");
            cdf += pmf;
            pmf *= lambda / f64::from(k + 1);
        }
    }

    #[test]
    fn gaussian_survival_is_renormalised() {
        let d = ResourceDistribution::new(DistributionKind::Gauss, 1.0, Some(1.0)).unwrap();
        // P(n >= 1 | n >= 0) = 0.5 / Phi(1)
        let expected = 0.5 / 0.841_344_746_068_542_9;
        assert!((d.survival(1.0) - expected).abs() < 1e-10);
    }

    #[test]
    fn l_curve_closed_forms() {
        let m1 = RepeaterModel::new(1.0).unwrap();
        let m2 = RepeaterModel::new(2.0).unwrap();
        let exp10 = ResourceDistribution::exponential(10.0).unwrap();
        assert_eq!(l_curve(&exp10, &m1, 0.5).unwrap(), 5.0);
        let exp100 = ResourceDistribution::exponential(100.0).unwrap();
        assert_eq!(l_curve(&exp100, &m2, 1.0).unwrap(), 10.0);
        for d in all_dists(10.0) {
            assert_eq!(l_curve(&d, &m1, 0.0).unwrap(), 0.0);
        }
        let uni = ResourceDistribution::new(DistributionKind::Uniform, 10.0, None).unwrap();
        let x = 0.7f64;
        let expected = 20.0 * (1.0 - (-x).exp());
        assert!((l_curve(&uni, &m1, x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn l_curve_rejects_noiseless_exponent() {
        let d = ResourceDistribution::exponential(10.0).unwrap();
        let m0 = RepeaterModel::new(0.0).unwrap();
        assert!(l_curve(&d, &m0, 0.3).is_err());
        assert_eq!(l_curve(&d, &m0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sampling_is_seeded_and_bounded() {
        let g = complete(40);
        let uni = ResourceDistribution::new(DistributionKind::Uniform, 10.0, None).unwrap();
        let a = sample_resources(&g, &uni, 3);
        assert_eq!(a, sample_resources(&g, &uni, 3));
        assert!(a.pairs().iter().all(|&n| (0.0..=20.0).contains(&n)));
        for d in all_dists(4.0) {
            let r = sample_resources(&g, &d, 9);
            assert!(r.pairs().iter().all(|&n| n >= 0.0));
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let n = 100_000u32;
        let g = Graph::new(n as usize + 1, (0..n).map(|i| (i, i + 1)).collect()).unwrap();
        let d = ResourceDistribution::exponential(10.0).unwrap();
        let r = sample_resources(&g, &d, 1);
        let mean = r.pairs().iter().sum::<f64>() / f64::from(n);
        let sigma = 10.0 / f64::from(n).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn resource_file_round_trip_and_alignment() {
        let g = path(4);
        let res = ResourceAssignment::new(&g, vec![1.5, 0.0, 1e-3]).unwrap();
        let mut buf = Vec::new();
        write_resources(&g, &res, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0\t1\t1.5\n1\t2\t0\n2\t3\t0.001\n");
        assert_eq!(read_resources(&g, &buf[..]).unwrap(), res);

        let missing = "0\t1\t1\n1\t2\t2\n";
        let err = read_resources(&g, missing.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("2\t3"), "{err}");
        assert!(read_resources(&g, "0\t1\t1\n1\t2\t-2\n2\t3\t1\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn survival_is_non_increasing(mean in 0.5f64..50.0, a in 0.0f64..200.0, b in 0.0f64..200.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for d in all_dists(mean) {
                prop_assert!(d.survival(hi) <= d.survival(lo) + 1e-15);
            }
        }

        #[test]
        fn l_curve_round_trip(mean in 0.5f64..200.0, x in 1e-4f64..15.0, alpha in 0.25f64..3.0) {
            let model = RepeaterModel::new(alpha).unwrap();
            for d in all_dists(mean) {
                let l = l_curve(&d, &model, x).unwrap();
                let back = -d.survival(model.threshold(l)).ln();
                prop_assert!((back - x).abs() < 1e-6, "{:?}: {} vs {}", d, back, x);
            }
        }

        #[test]
        fn l_curve_non_decreasing(mean in 0.5f64..100.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let model = RepeaterModel::new(1.5).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for d in all_dists(mean) {
                prop_assert!(l_curve(&d, &model, lo).unwrap() <= l_curve(&d, &model, hi).unwrap() + 1e-12);
            }
        }
    }
}
