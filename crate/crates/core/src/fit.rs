//! Least-squares fits of `log y = slope · log x + intercept`.

use alloc::vec::Vec;
use core::fmt;

use crate::math::{exp, log};

/// Minimum number of points for a reportable fit.
pub const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub range: (f64, f64),
    pub points_used: usize,
    /// Set when the range spans less than one decade.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitError {
    InsufficientPoints { found: usize, required: usize },
    DegenerateRange,
}

impl core::error::Error for FitError {}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::InsufficientPoints { found, required } => {
                write!(f, "{found} usable points, need at least {required}")
            }
            FitError::DegenerateRange => write!(f, "all abscissae coincide"),
        }
    }
}

impl ExponentFit {
    /// Fits the points with `lo <= x <= hi` and `x, y > 0`.
    pub fn fit(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<ExponentFit, FitError> {
        let kept: Vec<(f64, f64)> =
            points.iter().copied().filter(|&(x, y)| x >= lo && x <= hi && x > 0.0 && y > 0.0).collect();
        let logs: Vec<(f64, f64)> = kept.iter().map(|&(x, y)| (log(x), log(y))).collect();
        let n = logs.len();
        if n < MIN_POINTS {
            return Err(FitError::InsufficientPoints { found: n, required: MIN_POINTS });
        }
        let nf = n as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = logs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return Err(FitError::DegenerateRange);
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        let (xmin, xmax) = kept
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        Ok(ExponentFit {
            slope,
            intercept,
            r_squared,
            range: (xmin, xmax),
            points_used: n,
            low_confidence: xmax < 10.0 * xmin,
        })
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (log(lo), log(hi));
            (0..count)
                .map(|i| exp(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// Log-spaced integers in `[lo, hi]`, deduplicated and increasing.
pub fn log_grid_counts(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = log_grid(lo as f64, hi as f64, count)
        .into_iter()
        .map(|v| (v + 0.5) as usize)
        .map(|v| v.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}
