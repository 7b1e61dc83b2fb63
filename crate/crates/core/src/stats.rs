//! Monte Carlo summaries and simple fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Jackknife estimate of `stat(column means)` over per-trial records.
///
/// Every record must have the same length. `stat` receives the vector of
/// column means of the records it is given.
pub fn jackknife(records: &[Vec<f64>], stat: impl Fn(&[f64]) -> f64) -> Result<Estimate> {
    let n = records.len();
    if n < 2 {
        return Err(Error::InvalidArgument("jackknife needs ≥ 2 records".into()));
    }
    let width = records[0].len();
    if let Some(r) = records.iter().find(|r| r.len() != width) {
        return Err(Error::dim(width, r.len()));
    }
    let mut totals = vec![0.0; width];
    for r in records {
        for (t, x) in totals.iter_mut().zip(r) {
            *t += x;
        }
    }
    let full: Vec<f64> = totals.iter().map(|t| t / n as f64).collect();
    let value = stat(&full);
    let leave_out: Vec<f64> = records
        .iter()
        .map(|r| {
            let m: Vec<f64> = totals
                .iter()
                .zip(r)
                .map(|(t, x)| (t - x) / (n - 1) as f64)
                .collect();
            stat(&m)
        })
        .collect();
    let lm = mean(&leave_out);
    let var = leave_out.iter().map(|v| (v - lm).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Ok(Estimate { value, se: var.sqrt() })
}

/// Jackknife of a plain mean (equals the usual `s/√n`).
pub fn mean_estimate(xs: &[f64]) -> Result<Estimate> {
    let records: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    jackknife(&records, |m| m[0])
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::dim(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("fit needs ≥ 2 points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Undefined("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

/// Fit of `ln y` against `ln x`.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn jackknife_mean_is_standard_error() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let e = mean_estimate(&xs).unwrap();
        assert!((e.value - 4.0).abs() < 1e-12);
        let classic = (variance(&xs) / 5.0).sqrt();
        assert!((e.se - classic).abs() < 1e-12);
        assert!(mean_estimate(&[1.0]).is_err());
    }

    #[test]
    fn jackknife_ratio() {
        let recs = vec![vec![1.0, 2.0], vec![2.0, 2.0], vec![3.0, 2.0]];
        let e = jackknife(&recs, |m| m[0] / m[1]).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(e.se > 0.0);
        assert!(jackknife(&[vec![1.0], vec![1.0, 2.0]], |m| m[0]).is_err());
    }

    #[test]
    fn exact_line() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let g = log_log_fit(&[1.0, 4.0, 16.0], &[1.0, 0.5, 0.25]).unwrap();
        assert!((g.slope + 0.5).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(log_log_fit(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn r_squared_in_unit_interval(ys in proptest::collection::vec(-10.0f64..10.0, 3..20)) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let f = linear_fit(&xs, &ys).unwrap();
            prop_assert!(f.r_squared >= -1e-12 && f.r_squared <= 1.0 + 1e-12);
        }
    }
}
