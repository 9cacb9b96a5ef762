//! Series, aligned feature matrices and horizon targets.

use std::collections::{BTreeSet, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One named, date-indexed real-valued sequence, e.g. `AAPL.Close`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidSeries {
            id: id.clone(),
            reason,
        };
        if dates.len() != values.len() {
            return Err(invalid(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if dates.len() < 2 {
            return Err(invalid("at least two observations are required".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "dates not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at {}", dates[pos])));
        }
        Ok(Self { id, dates, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// N rows (dates) by M named feature columns. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    column_ids: Vec<String>,
    columns: Vec<Vec<f64>>,
    dates: Vec<NaiveDate>,
}

impl FeatureMatrix {
    pub fn new(column_ids: Vec<String>, columns: Vec<Vec<f64>>, dates: Vec<NaiveDate>) -> Result<Self> {
        if column_ids.len() != columns.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} column ids for {} columns",
                column_ids.len(),
                columns.len()
            )));
        }
        if column_ids.is_empty() {
            return Err(Error::InvalidMatrix("no columns".into()));
        }
        let mut seen = HashSet::with_capacity(column_ids.len());
        for id in &column_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidMatrix(format!("duplicate column id `{id}`")));
            }
        }
        let n = dates.len();
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("{n} rows, at least 2 required")));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMatrix("dates not strictly increasing".into()));
        }
        for (id, col) in column_ids.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "column `{id}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMatrix(format!("column `{id}` has non-finite entries")));
            }
        }
        Ok(Self {
            column_ids,
            columns,
            dates,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_ids(&self) -> &[String] {
        &self.column_ids
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.column_ids.iter().position(|c| c == id)
    }

    pub fn column(&self, id: &str) -> Result<&[f64]> {
        self.index_of(id)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownFeature(id.to_string()))
    }

    /// Row-wise view, mainly for display and tests.
    pub fn row(&self, r: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Keeps the given rows (ascending indices) in all columns.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(
            self.column_ids.clone(),
            self.columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            rows.iter().map(|&r| self.dates[r]).collect(),
        )
    }

    /// Re-wraps every column as a [`TimeSeries`].
    pub fn to_series(&self) -> Vec<TimeSeries> {
        self.column_ids
            .iter()
            .zip(&self.columns)
            .map(|(id, col)| TimeSeries {
                id: id.clone(),
                dates: self.dates.clone(),
                values: col.clone(),
            })
            .collect()
    }
}

/// Feature matrix plus the horizon-shifted target, row-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    features: FeatureMatrix,
    target_id: String,
    y: Vec<f64>,
    horizon: usize,
}

impl AlignedDataset {
    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn target_id(&self) -> &str {
        &self.target_id
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    /// The contemporaneous (unshifted) target column over the current rows.
    pub fn target_series(&self) -> &[f64] {
        self.features
            .column(&self.target_id)
            .expect("target column is validated at construction")
    }

    /// Keeps the given rows (ascending indices) of both features and target.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Ok(Self {
            features: self.features.select_rows(rows)?,
            target_id: self.target_id.clone(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            horizon: self.horizon,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    None,
    #[default]
    Zscore,
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "zscore" => Ok(Self::Zscore),
            other => Err(Error::InvalidArgument(format!(
                "normalization must be `none` or `zscore`, got `{other}`"
            ))),
        }
    }
}

/// Rows are the dates shared by every series, ascending; columns keep input order.
pub fn align(series: &[TimeSeries]) -> Result<FeatureMatrix> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidArgument("align needs at least one series".into()))?;
    let mut common: BTreeSet<NaiveDate> = first.dates.iter().copied().collect();
    for s in &series[1..] {
        let other: HashSet<NaiveDate> = s.dates.iter().copied().collect();
        common.retain(|d| other.contains(d));
    }
    if common.is_empty() {
        return Err(smallest_overlap(series));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let columns = series
        .iter()
        .map(|s| {
            // dates are sorted in both, so a merge walk picks the shared rows
            let mut out = Vec::with_capacity(dates.len());
            let mut j = 0;
            for (d, v) in s.dates.iter().zip(&s.values) {
                if j < dates.len() && *d == dates[j] {
                    out.push(*v);
                    j += 1;
                }
            }
            out
        })
        .collect();
    FeatureMatrix::new(series.iter().map(|s| s.id.clone()).collect(), columns, dates)
}

fn smallest_overlap(series: &[TimeSeries]) -> Error {
    if series.len() == 1 {
        return Error::Alignment {
            first: series[0].id.clone(),
            second: series[0].id.clone(),
            overlap: 0,
        };
    }
    let sets: Vec<HashSet<NaiveDate>> = series
        .iter()
        .map(|s| s.dates.iter().copied().collect())
        .collect();
    let mut best = (usize::MAX, 0, 1);
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            let overlap = sets[i].intersection(&sets[j]).count();
            if overlap < best.0 {
                best = (overlap, i, j);
            }
        }
    }
    Error::Alignment {
        first: series[best.1].id.clone(),
        second: series[best.2].id.clone(),
        overlap: best.0,
    }
}

/// `y[t] = target[t + horizon]`; the last `horizon` rows are dropped.
///
/// The target column stays in the feature matrix.
pub fn build_horizon_target(m: &FeatureMatrix, target_id: &str, horizon: usize) -> Result<AlignedDataset> {
    let target = m.column(target_id)?;
    let n = m.n_rows();
    if horizon >= n {
        return Err(Error::HorizonTooLarge { horizon, rows: n });
    }
    let keep = n - horizon;
    let y = target[horizon..].to_vec();
    let rows: Vec<usize> = (0..keep).collect();
    let features = if horizon == 0 {
        m.clone()
    } else {
        m.select_rows(&rows)?
    };
    Ok(AlignedDataset {
        features,
        target_id: target_id.to_string(),
        y,
        horizon,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n - 1) variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn normalize(values: &[f64], mode: NormalizationMode) -> Vec<f64> {
    match mode {
        NormalizationMode::None => values.to_vec(),
        NormalizationMode::Zscore => {
            let m = mean(values);
            let sd = sample_variance(values).sqrt();
            if sd == 0.0 || !sd.is_finite() {
                vec![0.0; values.len()]
            } else {
                values.iter().map(|v| (v - m) / sd).collect()
            }
        }
    }
}
