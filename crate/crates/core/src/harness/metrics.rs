use crate::error::{Error, Result};

/// Mean relative error (1/k)·Σ|v̂ᵢ − v*|/|v*|.
pub fn mre(estimates: &[f64], exact: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Domain("mean relative error of an empty estimate list".into()));
    }
    if exact == 0.0 || !exact.is_finite() {
        return Err(Error::Domain(format!(
            "relative error is undefined for exact value {exact}; use absolute error instead"
        )));
    }
    Ok(mean_abs_error(estimates, exact)? / exact.abs())
}

/// (1/k)·Σ|v̂ᵢ − v*|
pub fn mean_abs_error(estimates: &[f64], exact: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Domain("mean absolute error of an empty estimate list".into()));
    }
    let s: f64 = estimates.iter().map(|e| (e - exact).abs()).sum();
    Ok(s / estimates.len() as f64)
}

/// (1/k)·Σ(v̂ᵢ − v*)²
pub fn mse(estimates: &[f64], exact: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Domain("mean squared error of an empty estimate list".into()));
    }
    let s: f64 = estimates.iter().map(|e| (e - exact).powi(2)).sum();
    Ok(s / estimates.len() as f64)
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}
