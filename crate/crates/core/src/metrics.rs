//! Error metrics for fitness and reporting.
//!
//! A non-finite predicted value maps the whole metric to `+inf`, matching the
//! search loss for candidates whose evaluation blew up.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch: {actual} actual values vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("metric of an empty sequence")]
    Empty,
    #[error("actual values have zero range; NMAE is undefined")]
    ZeroRange,
    #[error("actual values must be finite")]
    NonFiniteActual,
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), MetricError> {
    if actual.len() != predicted.len() {
        return Err(MetricError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricError::Empty);
    }
    if actual.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::NonFiniteActual);
    }
    Ok(())
}

fn mean_of(actual: &[f64], predicted: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    if predicted.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| f(a - p)).sum();
    s / actual.len() as f64
}

/// Mean squared error.
pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    Ok(mean_of(actual, predicted, |r| r * r))
}

/// Mean absolute error.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    Ok(mean_of(actual, predicted, f64::abs))
}

fn range(actual: &[f64]) -> f64 {
    let (lo, hi) = actual.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    hi - lo
}

/// MAE normalised by the range of the actual values, in percent.
pub fn nmae(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    let r = range(actual);
    if r <= 0.0 {
        return Err(MetricError::ZeroRange);
    }
    Ok(mean_of(actual, predicted, f64::abs) / r * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub mae: f64,
    /// `None` when the actual values are constant.
    pub nmae_percent: Option<f64>,
    pub n: usize,
    pub y_range: f64,
}

impl MetricReport {
    /// All three metrics at once. A constant reference sequence is allowed
    /// here and leaves `nmae_percent` empty.
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self, MetricError> {
        let mse = mse(actual, predicted)?;
        let mae = mae(actual, predicted)?;
        let y_range = range(actual);
        let nmae_percent = (y_range > 0.0).then(|| mae / y_range * 100.0);
        Ok(Self {
            mse,
            mae,
            nmae_percent,
            n: actual.len(),
            y_range,
        })
    }
}
