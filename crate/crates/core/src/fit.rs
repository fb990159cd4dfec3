//! Log–log slope fits shared by every scaling estimator.
//!
//! Asymptotic `liminf`/`limsup` exponents cannot be computed from finite
//! data; they are bracketed by the minimum and maximum of the windowed
//! (consecutive-pair) slopes over the tail of the grid, with a least-squares
//! slope as the central value.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
    /// Standard error of the slope (zero for two points).
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("fit abscissae and ordinates differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientGrid { needed: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let rms = (ss / n).sqrt();
    let slope_stderr = if xs.len() > 2 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    if !slope.is_finite() {
        return Err(Error::NonFinite("linear fit"));
    }
    Ok(LineFit { slope, intercept, rms, slope_stderr })
}

/// Slopes between consecutive points.
pub fn windowed_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect()
}

/// Central least-squares slope plus min/max windowed brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub fit: LineFit,
    pub lower: f64,
    pub upper: f64,
    pub window_slopes: Vec<f64>,
}

/// Fits `ys` against `xs` over the points `from..` and brackets with the
/// windowed slopes of the same range.
pub fn scaling_fit(xs: &[f64], ys: &[f64], from: usize) -> Result<ScalingFit> {
    let fit = linear_fit(&xs[from..], &ys[from..])?;
    let window_slopes = windowed_slopes(xs, ys);
    let tail = &window_slopes[from..];
    let lower = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingFit { fit, lower, upper, window_slopes })
}

/// `n` points `first · ratio^j`.
pub fn geometric_grid(first: f64, ratio: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| first * ratio.powi(j as i32)).collect()
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
