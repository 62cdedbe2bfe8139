//! Log-log least-squares fits of error against scale.

use crate::error::{GeometryError, Result};

/// Default noise floor factor: points with error below
/// `NOISE_FACTOR · ε · problem_scale` are masked.
pub const NOISE_FACTOR: f64 = 100.0;

pub fn noise_floor(problem_scale: f64) -> f64 {
    NOISE_FACTOR * f64::EPSILON * problem_scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Scales in decreasing order.
    pub scales: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `true` for points excluded from the fit.
    pub noise_floor_mask: Vec<bool>,
    pub noise_floor: f64,
}

impl ConvergenceReport {
    pub fn unmasked(&self) -> usize {
        self.noise_floor_mask.iter().filter(|m| !**m).count()
    }
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Checks the sweep shape: at least five distinct positive scales spanning a
/// decade.
pub fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.len() < 5 {
        return Err(GeometryError::InsufficientData(format!(
            "need at least 5 scales, got {}",
            scales.len()
        )));
    }
    if scales.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(GeometryError::InvalidArgument("scales must be positive and finite".into()));
    }
    let hi = scales.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scales.iter().cloned().fold(f64::MAX, f64::min);
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(GeometryError::InsufficientData(format!(
            "scales span {:.3} decades, need at least one",
            (hi / lo).log10()
        )));
    }
    Ok(())
}

/// Fits `log(error) = slope·log(h) + intercept` with the default noise floor
/// (problem scale 1).
pub fn convergence_order(scales: &[f64], errors: &[f64]) -> Result<ConvergenceReport> {
    convergence_order_with_floor(scales, errors, noise_floor(1.0))
}

pub fn convergence_order_with_floor(
    scales: &[f64],
    errors: &[f64],
    floor: f64,
) -> Result<ConvergenceReport> {
    if scales.len() != errors.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: scales.len(),
            actual: errors.len(),
        });
    }
    check_scales(scales)?;
    let mut order: Vec<usize> = (0..scales.len()).collect();
    order.sort_by(|a, b| scales[*b].total_cmp(&scales[*a]));
    let scales: Vec<f64> = order.iter().map(|&i| scales[i]).collect();
    let errors: Vec<f64> = order.iter().map(|&i| errors[i]).collect();
    let mask: Vec<bool> = errors.iter().map(|e| !(e.is_finite() && *e > floor)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .zip(&errors)
        .zip(&mask)
        .filter(|(_, m)| !**m)
        .map(|((h, e), _)| (h.ln(), e.ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(GeometryError::InsufficientData(format!(
            "{} of {} points above the noise floor {floor:.3e}, need 4",
            xs.len(),
            scales.len()
        )));
    }
    let (fitted_slope, intercept, r_squared) = fit_line(&xs, &ys);
    Ok(ConvergenceReport {
        scales,
        errors,
        fitted_slope,
        intercept,
        r_squared,
        noise_floor_mask: mask,
        noise_floor: floor,
    })
}

/// Slope between each point and its predecessor; `None` for the first point
/// and wherever either error is not positive.
pub fn running_slopes(scales: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    (0..scales.len())
        .map(|i| {
            if i == 0 || errors[i] <= 0.0 || errors[i - 1] <= 0.0 {
                return None;
            }
            Some((errors[i] / errors[i - 1]).ln() / (scales[i] / scales[i - 1]).ln())
        })
        .collect()
}

/// `n` geometrically spaced scales from `h_max` down to `h_min`.
pub fn log_spaced_scales(h_min: f64, h_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![h_max];
    }
    let ratio = (h_min / h_max).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => h_max,
            i if i == n - 1 => h_min,
            i => h_max * (ratio * i as f64).exp(),
        })
        .collect()
}
