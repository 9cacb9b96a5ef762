//! Time-series distance measures.
//!
//! One-dimensional dynamic-programming measures (DTW, LCSS, EDR, ERP) use an
//! L1 step cost. The geometric measures (Hausdorff, discrete Fréchet, SSPD)
//! embed each series as 2-D points `(time_scale * i / (n - 1), v_i)` and use
//! Euclidean point distance.
//!
//! All measures expect inputs already normalized by the caller.

mod elastic;
mod geometric;

use serde::{Deserialize, Serialize};

pub use elastic::{dtw, edr, erp, lcss_distance};
pub use geometric::{frechet_discrete, hausdorff, sspd, Point};

use crate::dataset::NormalizationMode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    /// Match threshold for LCSS and EDR.
    pub epsilon_match: f64,
    /// ERP reference point.
    pub gap_ref: f64,
    /// Width of the time axis in the 2-D embedding.
    pub time_scale: f64,
    pub normalization: NormalizationMode,
    /// Sakoe-Chiba half-width for DTW; `None` is unconstrained.
    pub dtw_band: Option<usize>,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            epsilon_match: 0.25,
            gap_ref: 0.0,
            time_scale: 1.0,
            normalization: NormalizationMode::Zscore,
            dtw_band: None,
        }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_match > 0.0 && self.epsilon_match.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon_match must be positive, got {}",
                self.epsilon_match
            )));
        }
        if !(self.time_scale > 0.0 && self.time_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time_scale must be positive, got {}",
                self.time_scale
            )));
        }
        if !self.gap_ref.is_finite() {
            return Err(Error::InvalidArgument("gap_ref must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Dtw,
    Lcss,
    Edr,
    Erp,
    Hausdorff,
    Frechet,
    Sspd,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Euclidean,
        Metric::Dtw,
        Metric::Lcss,
        Metric::Edr,
        Metric::Erp,
        Metric::Hausdorff,
        Metric::Frechet,
        Metric::Sspd,
    ];

    pub fn distance(self, a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
        match self {
            Metric::Euclidean => euclidean(a, b),
            Metric::Dtw => dtw(a, b, p),
            Metric::Lcss => lcss_distance(a, b, p),
            Metric::Edr => edr(a, b, p),
            Metric::Erp => erp(a, b, p),
            Metric::Hausdorff => hausdorff(a, b, p),
            Metric::Frechet => frechet_discrete(a, b, p),
            Metric::Sspd => sspd(a, b, p),
        }
    }
}

pub(crate) fn check_inputs(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Metric("both series must be non-empty".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Metric("series contain non-finite values".into()));
    }
    Ok(())
}

/// Straight L2 distance; the only measure requiring equal lengths.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_inputs(a, b)?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Embeds a series as `(time_scale * i / (n - 1), v_i)`; a single point sits at t = 0.
pub fn embed(values: &[f64], time_scale: f64) -> Vec<Point> {
    let n = values.len();
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| Point {
            t: time_scale * i as f64 / denom,
            v,
        })
        .collect()
}
