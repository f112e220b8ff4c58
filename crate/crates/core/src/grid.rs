use crate::error::{Error, Result};

/// `n` log-spaced points from `min` to `max`, endpoints exact.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) || n < 2 {
        return Err(Error::Usage(format!(
            "log grid needs 0 < min < max and at least 2 points (got {min}, {max}, {n})"
        )));
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (lo + step * i as f64).exp()).collect();
    g[0] = min;
    g[n - 1] = max;
    Ok(g)
}

/// `n` evenly spaced points from `min` to `max`.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(max > min && min.is_finite() && max.is_finite()) || n < 2 {
        return Err(Error::Usage(format!(
            "linear grid needs min < max and at least 2 points (got {min}, {max}, {n})"
        )));
    }
    let step = (max - min) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| min + step * i as f64).collect();
    g[n - 1] = max;
    Ok(g)
}
