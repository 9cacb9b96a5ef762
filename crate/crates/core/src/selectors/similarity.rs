use rayon::prelude::*;

use crate::dataset::{normalize, AlignedDataset};
use crate::error::Result;
use crate::metrics::{Metric, MetricParams};

/// Negated distance from each normalized feature to the normalized,
/// unshifted target series over the same rows.
pub fn similarity_scores(ds: &AlignedDataset, metric: Metric, params: &MetricParams) -> Result<Vec<f64>> {
    let reference = normalize(ds.target_series(), params.normalization);
    ds.features()
        .columns()
        .par_iter()
        .map(|col| {
            let x = normalize(col, params.normalization);
            metric.distance(&x, &reference, params).map(|d| -d)
        })
        .collect()
}
