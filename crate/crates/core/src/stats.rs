//! Ensemble reductions: mean and standard error, two-sample
//! Kolmogorov-Smirnov.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};

/// Smallest sample accepted by [`ks_two_sample`].
pub const KS_MIN_SAMPLES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Sample mean and standard error of the mean. The reduction runs in input
/// order, so equal inputs give bitwise equal results.
pub fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    if n == 0 {
        return MeanSe { mean: f64::NAN, std_error: f64::NAN, count: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return MeanSe { mean, std_error: 0.0, count: 1 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    MeanSe { mean, std_error: (var / n as f64).sqrt(), count: n }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Theta-function form converges quickly for small x.
        let pi2 = std::f64::consts::PI.powi(2);
        let mut sum = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            sum += (-j * j * pi2 / (8.0 * x * x)).exp();
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * sum;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (including the usual small-sample correction of the argument).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let needed = KS_MIN_SAMPLES;
    let got = a.len().min(b.len());
    if got < needed {
        return Err(SleError::InsufficientSamples { needed, got });
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(SleError::Degenerate("NaN in KS sample".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    let p_value = kolmogorov_survival((en + 0.12 + 0.11 / en) * d);
    Ok(KsResult { statistic: d, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a: Vec<f64> = (0..100).map(|k| (k as f64 * 0.37).sin()).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_supports() {
        // Uniform grid on [0, 1) and its shift by one.
        let a: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn undersized() {
        let a = vec![0.0; 49];
        assert!(matches!(ks_two_sample(&a, &a), Err(SleError::InsufficientSamples { needed: 50, got: 49 })));
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series are valid near the switch point.
        let x: f64 = 1.18;
        let mut alt = 0.0;
        let mut sign = 1.0;
        for k in 1..=50 {
            alt += sign * (-2.0 * (k * k) as f64 * x * x).exp();
            sign = -sign;
        }
        assert!((kolmogorov_survival(x - 1e-12) - 2.0 * alt).abs() < 1e-10);
        // Known value Q(1.36) ~ 0.0494.
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 5e-4);
    }

    #[test]
    fn mean_and_error() {
        let r = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.mean, 2.5);
        assert!((r.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[]).count, 0);
    }
}
