//! Small numerical helpers shared by the estimators.

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when there are only two points.
    pub slope_se: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    assert_eq!(x.len(), y.len(), "ols: length mismatch");
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "regression needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let slope_se = if n > 2 {
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        r_squared,
        n,
    })
}

/// Nearest-rank quantile: the smallest element whose rank is at least `q·m`.
/// `sorted` must be ascending and non-empty.
pub fn nearest_rank<T: Copy>(sorted: &[T], q: f64) -> T {
    assert!(!sorted.is_empty(), "nearest_rank on empty slice");
    let m = sorted.len();
    // The epsilon keeps q·m = 90.000000000000001 from rounding up a rank.
    let rank = ((q * m as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(m) - 1]
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Percentile interval over bootstrap replicates (sorted in place).
pub fn percentile_interval(replicates: &mut [f64], level: f64) -> (f64, f64) {
    replicates.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (
        nearest_rank(replicates, tail),
        nearest_rank(replicates, 1.0 - tail),
    )
}

/// Log-spaced integers in `[lo, hi]`, deduplicated.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    assert!(lo >= 1 && hi >= lo && count >= 2);
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}
