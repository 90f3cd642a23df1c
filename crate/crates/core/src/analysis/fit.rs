use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Least-squares power law `value ≈ e^{intercept} κ^{slope}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// `(κ, log value - fitted log value)` per point in the window.
    pub residuals: Vec<(f64, f64)>,
}

/// Ordinary least squares of `log value` against `log κ` over `lo <= κ <= hi`.
pub fn fit_exponent(table: &[(f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = table
        .iter()
        .copied()
        .filter(|&(k, _)| k >= lo && k <= hi)
        .collect();
    if pts.len() < 5 {
        return param(format!(
            "fit window [{lo}, {hi}] holds {} points, need at least 5",
            pts.len()
        ));
    }
    if let Some(&(k, v)) = pts.iter().find(|&&(k, v)| !(v > 0.0) || !(k > 0.0)) {
        return param(format!(
            "non-positive value {v} at kappa = {k} inside the fit window"
        ));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<(f64, f64)> = pts
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(p, (x, y))| (p.0, y - (intercept + slope * x)))
        .collect();
    let rss: f64 = residuals.iter().map(|r| r.1 * r.1).sum();
    let slope_stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr,
        window,
        points: pts.len(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let t: Vec<(f64, f64)> = (1..40)
            .map(|k| (k as f64, 3.0 * (k as f64).powi(-4)))
            .collect();
        let f = fit_exponent(&t, (5.0, 30.0)).unwrap();
        assert!((f.slope + 4.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-11);
        assert_eq!(f.points, 26);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn rejects_short_or_nonpositive_windows() {
        let t: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_exponent(&t, (1.0, 4.0)).is_err());
        let mut t2 = t.clone();
        t2[4].1 = 0.0;
        assert!(fit_exponent(&t2, (1.0, 9.0)).is_err());
    }
}
