use serde::{Deserialize, Serialize};

use super::OutageCurve;
use crate::error::{RelayError, Result};

/// Outage count a grid point needs before it enters the slope window.
pub const DEFAULT_MIN_COUNT: u64 = 50;

/// Least-squares line through `(log10 ρ, log10 p_hat)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Diversity estimate: the negated fitted slope.
    pub slope: f64,
    pub intercept: f64,
    /// Grid indices used.
    pub window: Vec<usize>,
    /// Standard error of the slope; absent for a two-point window.
    pub stderr: Option<f64>,
}

/// Fits the high-SNR end of an outage curve.
///
/// The window is the last contiguous run of points with at least `min_count`
/// outages.
pub fn fit_diversity_slope(curve: &OutageCurve, min_count: u64) -> Result<SlopeFit> {
    let admissible: Vec<bool> = curve.points.iter().map(|p| p.outages >= min_count.max(1)).collect();
    let Some(last) = admissible.iter().rposition(|&a| a) else {
        return Err(RelayError::InsufficientData { admissible: 0 });
    };
    let first = admissible[..last].iter().rposition(|&a| !a).map_or(0, |k| k + 1);
    let window: Vec<usize> = (first..=last).collect();
    if window.len() < 2 {
        return Err(RelayError::InsufficientData { admissible: window.len() });
    }
    let x: Vec<f64> = window.iter().map(|&k| curve.points[k].rho.log10()).collect();
    let y: Vec<f64> = window.iter().map(|&k| curve.points[k].p_hat.log10()).collect();
    let (slope, intercept, stderr) = fit_log_log(&x, &y)?;
    Ok(SlopeFit { slope: -slope, intercept, window, stderr })
}

/// Ordinary least squares `y = a x + b`, returning `(a, b, stderr(a))`.
pub fn fit_log_log(x: &[f64], y: &[f64]) -> Result<(f64, f64, Option<f64>)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(RelayError::InsufficientData { admissible: n.min(y.len()) });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(RelayError::OutOfRange("slope fit needs at least two distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = (n > 2).then(|| {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    });
    Ok((slope, intercept, stderr))
}
