use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{HarnessError, Result};

/// Two-sided Kolmogorov–Smirnov distance between the empirical CDF of
/// `samples` and the standard normal CDF.
pub fn ks_statistic(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(HarnessError::Core(layered_hill::Error::EmptySample));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(HarnessError::Config("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let p = normal.cdf(x);
        acc.max((i as f64 + 1.0) / n - p).max(p - i as f64 / n)
    }))
}

/// Sample mean and (n - 1) standard deviation.
pub fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_probe() {
        let normal = Normal::standard();
        let n = 1000;
        let q: Vec<f64> = (1..=n).map(|j| normal.inverse_cdf((j as f64 - 0.5) / n as f64)).collect();
        let ks = ks_statistic(&q).unwrap();
        assert!(ks <= 0.001 + 0.5 / n as f64, "{ks}");
    }

    #[test]
    fn single_point() {
        assert!((ks_statistic(&[0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shifted_sample() {
        let normal = Normal::standard();
        let q: Vec<f64> = (1..=500).map(|j| normal.inverse_cdf((j as f64 - 0.5) / 500.0) + 5.0).collect();
        assert!(ks_statistic(&q).unwrap() > 0.9);
    }

    #[test]
    fn empty_sample() {
        assert!(matches!(
            ks_statistic(&[]),
            Err(HarnessError::Core(layered_hill::Error::EmptySample))
        ));
    }

    #[test]
    fn moments() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
