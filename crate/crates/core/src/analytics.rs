//! Closed-form and semi-analytic quantities.
//!
//! The Erdős–Rényi diameter approximation, the `c*` root it needs, the
//! self-consistency map Y(x̃) = x̃ − D(x̃)^α/⟨n⟩ and the two critical values
//! derived from it: the resource level `n_c` above which the transition is
//! continuous, and the repeater efficiency `α_c` below which no resource level
//! makes it discontinuous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percolation::PercolationCurve;
use crate::resources::RepeaterModel;

/// Effective degrees closer to 1 than this are treated as the singular point.
pub const SINGULAR_TOLERANCE: f64 = 1e-6;

/// Root in (0, 1] of t·e^{-t} = c·e^{-c}, the conjugate degree of a
/// supercritical random graph.
pub fn cstar(c_eff: f64) -> Result<f64> {
    if !(c_eff > 1.0) || !c_eff.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "c* needs an effective degree above 1, got {c_eff}"
        )));
    }
    let target = c_eff * (-c_eff).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo >= 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid * (-mid).exp() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Erdős–Rényi graph described by size and mean degree only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ERAnalytic {
    pub n: usize,
    pub c: f64,
}

impl ERAnalytic {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {n}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("mean degree must be positive, got {c}")));
        }
        Ok(Self { n, c })
    }

    /// Location of the pole, where the effective degree reaches 1.
    pub fn threshold(&self) -> f64 {
        self.c.ln()
    }
}

/// Approximate diameter at retention e^{-(x+y)}. On the supercritical side
/// `ln N [1/ln c_eff − 2/ln c*]`, on the subcritical side `−ln N / ln c_eff`,
/// with c_eff = c·e^{-(x+y)}.
pub fn er_diameter(a: &ERAnalytic, x_plus_y: f64) -> Result<f64> {
    if !(x_plus_y >= 0.0) {
        return Err(Error::InvalidArgument(format!("x+y must be non-negative, got {x_plus_y}")));
    }
    let c_eff = a.c * (-x_plus_y).exp();
    if (c_eff - 1.0).abs() < SINGULAR_TOLERANCE {
        return Err(Error::SingularPoint(x_plus_y));
    }
    let ln_n = (a.n as f64).ln();
    let k = a.c.ln() - x_plus_y;
    if c_eff > 1.0 {
        Ok(ln_n * (1.0 / k - 2.0 / cstar(c_eff)?.ln()))
    } else {
        Ok(-ln_n / k)
    }
}

/// Anything that gives a diameter as a function of x̃ = x + y.
pub trait DiameterSource {
    fn diameter_at(&self, x_tilde: f64) -> Result<f64>;
}

impl DiameterSource for ERAnalytic {
    fn diameter_at(&self, x_tilde: f64) -> Result<f64> {
        er_diameter(self, x_tilde)
    }
}

impl DiameterSource for PercolationCurve {
    fn diameter_at(&self, x_tilde: f64) -> Result<f64> {
        PercolationCurve::diameter_at(self, x_tilde)
            .ok_or_else(|| Error::InvalidArgument(format!("{x_tilde} lies outside the curve grid")))
    }
}

/// Y(x̃) = x̃ − D(x̃)^α/⟨n⟩: the failure level `y` at which x̃ is a fixed point.
pub fn y_function<S: DiameterSource + ?Sized>(
    d: &S,
    mean_n: f64,
    model: &RepeaterModel,
    x_tilde: f64,
) -> Result<f64> {
    let dx = d.diameter_at(x_tilde)?;
    Ok(x_tilde - dx.powf(model.alpha()) / mean_n)
}

/// A diameter curve sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiameterProfile {
    pub x: Vec<f64>,
    pub d: Vec<f64>,
}

impl DiameterProfile {
    pub fn new(x: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if x.len() != d.len() {
            return Err(Error::InvalidArgument("profile coordinates differ in length".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("profile grid must be ascending".into()));
        }
        Ok(Self { x, d })
    }

    pub fn from_curve(curve: &PercolationCurve) -> Self {
        Self {
            x: curve.grid.clone(),
            d: curve.mean_d.clone(),
        }
    }

    /// Samples the analytic diameter on `[0, upto)` with spacing `step`,
    /// skipping any point inside the singular band.
    pub fn from_er(a: &ERAnalytic, upto: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        let mut x = Vec::new();
        let mut d = Vec::new();
        let mut i = 0u32;
        loop {
            let xi = f64::from(i) * step;
            if xi >= upto {
                break;
            }
            match er_diameter(a, xi) {
                Ok(v) => {
                    x.push(xi);
                    d.push(v);
                }
                Err(Error::SingularPoint(_)) => {}
                Err(e) => return Err(e),
            }
            i += 1;
        }
        Ok(Self { x, d })
    }

    /// Keeps every `factor`-th sample.
    pub fn subsample(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        Self {
            x: self.x.iter().step_by(factor).copied().collect(),
            d: self.d.iter().step_by(factor).copied().collect(),
        }
    }

    /// Smoothed values and centred slopes of the samples below `y_c3`.
    fn smoothed_slopes(&self, y_c3: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let m = self.x.partition_point(|&x| x < y_c3);
        if m < 5 {
            return Err(Error::GridTooShort);
        }
        let x = &self.x[..m];
        let d = &self.d[..m];
        let s: Vec<f64> = (0..m)
            .map(|i| {
                let h = i.min(m - 1 - i).min(2);
                d[i - h..=i + h].iter().sum::<f64>() / (2 * h + 1) as f64
            })
            .collect();
        let slope: Vec<f64> = (0..m)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
                (s[b] - s[a]) / (x[b] - x[a])
            })
            .collect();
        Ok((x.to_vec(), s, slope))
    }
}

/// α · max D^{α−1}·D′ over the samples in (0, y_c3), after 5-point smoothing.
/// Resource means at or above this give a continuous transition.
pub fn n_critical(profile: &DiameterProfile, model: &RepeaterModel, y_c3: f64) -> Result<f64> {
    let alpha = model.alpha();
    let (x, s, slope) = profile.smoothed_slopes(y_c3)?;
    let best = (0..x.len())
        .filter(|&i| x[i] > 0.0)
        .map(|i| alpha * s[i].powf(alpha - 1.0) * slope[i])
        .fold(0.0f64, f64::max);
    Ok(best)
}

/// min (D/x)/D′ over samples in (0, y_c3) where D′ > 0; infinite when the
/// diameter never grows.
pub fn alpha_critical(profile: &DiameterProfile, y_c3: f64) -> Result<f64> {
    let (x, s, slope) = profile.smoothed_slopes(y_c3)?;
    Ok((0..x.len())
        .filter(|&i| x[i] > 0.0 && slope[i] > 0.0)
        .map(|i| (s[i] / x[i]) / slope[i])
        .fold(f64::INFINITY, f64::min))
}

/// Shape of Y(x̃) over the samples in (0, y_c3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YMonotonicity {
    pub increasing: bool,
    pub decreasing: bool,
}

/// Checks whether Y is strictly increasing or strictly decreasing on the
/// samples in (0, y_c3), using the same smoothing as [`n_critical`] (raw
/// samples when fewer than five are available). Increasing Y means a single
/// fixed point for every y.
pub fn y_monotonicity(
    profile: &DiameterProfile,
    mean_n: f64,
    model: &RepeaterModel,
    y_c3: f64,
) -> YMonotonicity {
    let (x, d) = match profile.smoothed_slopes(y_c3) {
        Ok((x, s, _)) => (x, s),
        Err(_) => (profile.x.clone(), profile.d.clone()),
    };
    let ys: Vec<f64> = x
        .iter()
        .zip(&d)
        .filter(|(&x, _)| x > 0.0 && x < y_c3)
        .map(|(&x, &d)| x - d.powf(model.alpha()) / mean_n)
        .collect();
    YMonotonicity {
        increasing: ys.windows(2).all(|w| w[1] > w[0]),
        decreasing: ys.windows(2).all(|w| w[1] < w[0]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Yc1Estimate {
    pub y_c1: f64,
    /// Set when the estimate is negative: no failure level keeps a giant
    /// functional component.
    pub broken_at_origin: bool,
}

/// y_c1 ≈ y_c3 − D_max^α/⟨n⟩.
pub fn yc1_from_yc3(y_c3: f64, d_max: f64, mean_n: f64, model: &RepeaterModel) -> Result<Yc1Estimate> {
    if !(mean_n > 0.0) {
        return Err(Error::InvalidArgument(format!("mean resources must be positive, got {mean_n}")));
    }
    let y_c1 = y_c3 - d_max.powf(model.alpha()) / mean_n;
    Ok(Yc1Estimate {
        y_c1,
        broken_at_origin: y_c1 < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(alpha: f64) -> RepeaterModel {
        RepeaterModel::new(alpha).unwrap()
    }

    /// Fixed-point iteration t <- c e^{-c} e^{t}, convergent on the small root.
    fn cstar_by_iteration(c: f64) -> f64 {
        let k = c * (-c).exp();
        let mut t = k;
        for _ in 0..10_000 {
            t = k * t.exp();
        }
        t
    }

    #[test]
    fn cstar_values() {
        assert!((cstar(2.0).unwrap() - 0.4064).abs() < 1e-4);
        assert!((cstar(6.0).unwrap() - 0.0151).abs() < 1e-4);
        assert!((cstar(2.0).unwrap() - cstar_by_iteration(2.0)).abs() < 1e-10);
        assert!((cstar(6.0).unwrap() - cstar_by_iteration(6.0)).abs() < 1e-12);
        assert!(cstar(1.0 + 1e-9).unwrap() > 0.999);
        assert!(cstar(1.0).is_err());
        assert!(cstar(0.5).is_err());
    }

    #[test]
    fn er_diameter_values() {
        let a = ERAnalytic::new(100_000, 6.0).unwrap();
        let ln_n = (1e5f64).ln();
        let at0 = er_diameter(&a, 0.0).unwrap();
        // independent evaluation: 1/ln 6 − 2/ln c*(6)
        let expect = ln_n * (1.0 / 6f64.ln() - 2.0 / cstar_by_iteration(6.0).ln());
        assert!((at0 - expect).abs() < 1e-8);
        assert!((at0 / ln_n - 1.035).abs() < 0.005);
        let sub = er_diameter(&a, 6f64.ln() + 1.0).unwrap();
        assert!((sub - ln_n).abs() < 1e-9);
        assert!(matches!(er_diameter(&a, 6f64.ln()), Err(Error::SingularPoint(_))));
        assert!(er_diameter(&a, -0.1).is_err());
        assert!(ERAnalytic::new(1, 6.0).is_err());
        assert!(ERAnalytic::new(10, 0.0).is_err());
    }

    #[test]
    fn y_function_limits() {
        let a = ERAnalytic::new(10_000, 6.0).unwrap();
        let d0 = er_diameter(&a, 0.0).unwrap();
        assert!((y_function(&a, 50.0, &model(1.0), 0.0).unwrap() + d0 / 50.0).abs() < 1e-12);
        assert!((y_function(&a, 1e15, &model(2.0), 0.7).unwrap() - 0.7).abs() < 1e-10);
    }

    fn linear(k: f64) -> DiameterProfile {
        let x: Vec<f64> = (0..100).map(|i| f64::from(i) * 0.02).collect();
        let d = x.iter().map(|&x| k * x).collect();
        DiameterProfile::new(x, d).unwrap()
    }

    #[test]
    fn critical_values_on_simple_profiles() {
        let p = linear(3.0);
        assert!((n_critical(&p, &model(1.0), 1.5).unwrap() - 3.0).abs() < 1e-9);
        assert!((alpha_critical(&p, 1.5).unwrap() - 1.0).abs() < 1e-9);

        let flat = DiameterProfile::new((0..50).map(|i| f64::from(i) * 0.02).collect(), vec![7.0; 50]).unwrap();
        assert_eq!(n_critical(&flat, &model(1.0), 0.9).unwrap(), 0.0);
        assert_eq!(alpha_critical(&flat, 0.9).unwrap(), f64::INFINITY);

        assert!(matches!(n_critical(&p, &model(1.0), 0.07), Err(Error::GridTooShort)));
    }

    #[test]
    fn n_critical_alpha_two() {
        // D = 2x: alpha D D' = 2 * 2x * 2, largest at the last point below y_c3
        let p = linear(2.0);
        let n = n_critical(&p, &model(2.0), 1.0).unwrap();
        let x_last = 0.98;
        // smoothing shrinks towards the end but is exact for a linear profile
        assert!((n - 8.0 * x_last).abs() < 1e-9, "{n}");
    }

    #[test]
    fn critical_values_survive_subsampling() {
        // smooth rise to a peak at 1.5, sampled like a percolation curve
        let x: Vec<f64> = (0..126).map(|i| f64::from(i) * 0.02).collect();
        let d = x.iter().map(|&x| 10.0 + 40.0 * (-(x - 1.5f64).powi(2) / 0.1).exp()).collect();
        let p = DiameterProfile::new(x, d).unwrap();
        let q = p.subsample(2);
        for alpha in [1.0, 2.0] {
            let (n1, n2) = (
                n_critical(&p, &model(alpha), 2.4).unwrap(),
                n_critical(&q, &model(alpha), 2.4).unwrap(),
            );
            assert!((n1 - n2).abs() / n1 < 0.1, "{n1} {n2}");
        }
        let (a1, a2) = (alpha_critical(&p, 2.4).unwrap(), alpha_critical(&q, 2.4).unwrap());
        assert!((a1 - a2).abs() / a1 < 0.1, "{a1} {a2}");
    }

    #[test]
    fn yc1_substitution() {
        let e = yc1_from_yc3(1.79, 30.0, 60.0, &model(1.0)).unwrap();
        assert!((e.y_c1 - 1.29).abs() < 1e-12);
        assert!(!e.broken_at_origin);
        assert!(yc1_from_yc3(0.5, 30.0, 10.0, &model(1.0)).unwrap().broken_at_origin);
        assert!(yc1_from_yc3(1.0, 3.0, 0.0, &model(1.0)).is_err());
        assert!((yc1_from_yc3(1.79, 30.0, 1e15, &model(1.0)).unwrap().y_c1 - 1.79).abs() < 1e-9);
    }

    #[test]
    fn y_increasing_for_large_means() {
        let a = ERAnalytic::new(100_000, 6.0).unwrap();
        let p = DiameterProfile::from_er(&a, 1.5, 0.01).unwrap();
        let n_c = n_critical(&p, &model(1.0), 1.5).unwrap();
        let m = y_monotonicity(&p, 1.5 * n_c, &model(1.0), 1.5);
        assert!(m.increasing && !m.decreasing);
        let m = y_monotonicity(&p, 0.5 * n_c, &model(1.0), 1.5);
        assert!(!m.increasing);
    }

    proptest! {
        #[test]
        fn cstar_residual(c in 1.0001f64..20.0) {
            let t = cstar(c).unwrap();
            prop_assert!(t > 0.0 && t <= 1.0);
            prop_assert!((t * (-t).exp() - c * (-c).exp()).abs() < 1e-10);
        }

        #[test]
        fn yc1_monotone(n1 in 1.0f64..500.0, dn in 0.1f64..500.0, dmax in 1.01f64..80.0) {
            let m1 = model(1.0);
            let m2 = model(2.0);
            let a = yc1_from_yc3(1.8, dmax, n1, &m1).unwrap().y_c1;
            let b = yc1_from_yc3(1.8, dmax, n1 + dn, &m1).unwrap().y_c1;
            prop_assert!(b > a);
            prop_assert!(yc1_from_yc3(1.8, dmax, n1, &m2).unwrap().y_c1 < a);
        }
    }
}
