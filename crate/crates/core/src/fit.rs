//! Ordinary least squares on small point sets.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("abscissae are all equal")]
    Degenerate,
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("non-finite or non-positive value at index {0} in a log-log fit")]
    NonPositive(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(FitError::TooFewPoints(n));
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residuals = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (slope * x + intercept))
        .collect();
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
    })
}

/// `y ≈ prefactor · x^exponent`, fitted on `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
}

pub fn power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLaw, FitError> {
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0) {
            return Err(FitError::NonPositive(i));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let fit = least_squares(&lx, &ly)?;
    Ok(PowerLaw {
        prefactor: fit.intercept.exp(),
        exponent: fit.slope,
    })
}
