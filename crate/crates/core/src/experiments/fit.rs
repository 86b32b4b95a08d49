use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fits with `r^2` below this are reported without a rate.
pub const MIN_R_SQUARED_FOR_RATE: f64 = 0.9;

const MIN_POINTS: usize = 4;

/// Least-squares fit of `value = K exp(-alpha t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub k: f64,
    pub alpha: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl ExpFit {
    /// The rate, if the fit is good enough to quote one.
    pub fn reported_alpha(&self) -> Option<f64> {
        (self.r_squared >= MIN_R_SQUARED_FOR_RATE).then_some(self.alpha)
    }
}

/// Ordinary least squares of `ln value` against `t`, using only values above
/// `resolution_floor`.
pub fn fit_exponential(times: &[f64], values: &[f64], resolution_floor: f64) -> Result<ExpFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} times, {} values",
            times.len(),
            values.len()
        )));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| t.is_finite() && v.is_finite() && **v > resolution_floor && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_POINTS, count: pts.len() });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::InvalidParameter("all fit times coincide".into()));
    }
    let sty: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - ym).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot <= 1e-300 { 1.0 } else { (1.0 - ss_res / ss_tot).max(0.0) };
    Ok(ExpFit { k: intercept.exp(), alpha: -slope, r_squared, points: pts.len() })
}
