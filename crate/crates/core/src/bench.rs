//! The shrinking-sample benchmark: re-select and re-score every method at each
//! retained fraction, then summarize each R² trajectory by its trend line.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::{mean, sample_variance, AlignedDataset};
use crate::error::{Error, Result};
use crate::regression::kfold_cv;
use crate::rng::{derive_seed, Rng, PRNG_NAME};
use crate::selectors::{select, Method, SelectorSpec};

/// Smallest dataset that still leaves two rows per fold of 10-fold CV.
pub const MIN_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShrinkPolicy {
    /// Keep the most recent rows.
    #[default]
    Suffix,
    /// Keep the oldest rows.
    Prefix,
    /// Keep a seeded random subset, in date order.
    Random,
}

impl std::str::FromStr for ShrinkPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "suffix" => Ok(Self::Suffix),
            "prefix" => Ok(Self::Prefix),
            "random" => Ok(Self::Random),
            other => Err(Error::InvalidArgument(format!(
                "shrink policy must be prefix, suffix or random, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkSchedule {
    pub fractions: Vec<f64>,
    pub row_policy: ShrinkPolicy,
}

impl ShrinkSchedule {
    /// Percentages `start, start - step, ...` down to `end` inclusive.
    pub fn from_percent(start: u32, end: u32, step: u32, row_policy: ShrinkPolicy) -> Result<Self> {
        if step == 0 || start > 100 || end == 0 || end > start {
            return Err(Error::InvalidArgument(format!(
                "bad schedule bounds {start}%..{end}% step {step}%"
            )));
        }
        let fractions = (0..)
            .map(|i| start as i64 - i * step as i64)
            .take_while(|&p| p >= end as i64)
            .map(|p| p as f64 / 100.0)
            .collect();
        Self::new(fractions, row_policy)
    }

    /// 100% down to 20% in 1% steps: 81 points.
    pub fn full() -> Self {
        Self::from_percent(100, 20, 1, ShrinkPolicy::Suffix).expect("valid bounds")
    }

    /// 100% down to 20% in 5% steps: 17 points.
    pub fn desk() -> Self {
        Self::from_percent(100, 20, 5, ShrinkPolicy::Suffix).expect("valid bounds")
    }

    pub fn new(fractions: Vec<f64>, row_policy: ShrinkPolicy) -> Result<Self> {
        if fractions.first() != Some(&1.0) {
            return Err(Error::InvalidArgument("schedule must start at 1.0".into()));
        }
        if fractions.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("schedule must be strictly decreasing".into()));
        }
        if fractions.iter().any(|&f| f < 0.2 - 1e-12) {
            return Err(Error::InvalidArgument("schedule must not go below 0.20".into()));
        }
        Ok(Self {
            fractions,
            row_policy,
        })
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }
}

/// Row count kept at `fraction`: `ceil(fraction * n)`.
pub fn kept_rows(n: usize, fraction: f64) -> usize {
    // the slack absorbs representation error such as 0.07 * 100 = 7.000000000000001
    ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Keeps the most recent `ceil(fraction * N)` rows.
pub fn shrink(ds: &AlignedDataset, fraction: f64) -> Result<AlignedDataset> {
    shrink_with(ds, fraction, ShrinkPolicy::Suffix, 0)
}

pub fn shrink_with(ds: &AlignedDataset, fraction: f64, policy: ShrinkPolicy, seed: u64) -> Result<AlignedDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction must be in (0, 1], got {fraction}")));
    }
    let n = ds.n_rows();
    let keep = kept_rows(n, fraction);
    if keep < MIN_ROWS {
        return Err(Error::TooFewRows {
            rows: keep,
            min: MIN_ROWS,
        });
    }
    if keep == n {
        return Ok(ds.clone());
    }
    let rows: Vec<usize> = match policy {
        ShrinkPolicy::Suffix => (n - keep..n).collect(),
        ShrinkPolicy::Prefix => (0..keep).collect(),
        ShrinkPolicy::Random => {
            let mut all: Vec<usize> = (0..n).collect();
            Rng::new(seed).shuffle(&mut all);
            let mut rows = all[..keep].to_vec();
            rows.sort_unstable();
            rows
        }
    };
    ds.select_rows(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendStats {
    pub slope: f64,
    pub intercept: f64,
    pub fluctuation: f64,
}

/// Least-squares line of r2 on fraction; fluctuation is the sample std of residuals.
pub fn trend_stats(points: &[(f64, f64)]) -> Result<TrendStats> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "trend needs at least 3 points, got {}",
            points.len()
        )));
    }
    // shift by the first point so constant inputs give exact zeros
    let (x0, y0) = points[0];
    let dx: Vec<f64> = points.iter().map(|p| p.0 - x0).collect();
    let dy: Vec<f64> = points.iter().map(|p| p.1 - y0).collect();
    let (mx, my) = (mean(&dx), mean(&dy));
    let sxx: f64 = dx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("trend needs distinct fractions".into()));
    }
    let sxy: f64 = dx.iter().zip(&dy).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let shifted_intercept = my - slope * mx;
    let residuals: Vec<f64> = dx
        .iter()
        .zip(&dy)
        .map(|(x, y)| y - (shifted_intercept + slope * x))
        .collect();
    Ok(TrendStats {
        slope,
        intercept: y0 + shifted_intercept - slope * x0,
        fluctuation: sample_variance(&residuals).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub fraction: f64,
    pub rows: usize,
    /// Mean held-out R² over folds; `None` for an error cell.
    pub mean_r2: Option<f64>,
    pub fold_std: Option<f64>,
    #[serde(default)]
    pub degenerate_folds: usize,
    #[serde(default)]
    pub selected: Vec<String>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTrajectory {
    pub method: Method,
    pub points: Vec<TrajectoryPoint>,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub intercept: Option<f64>,
    #[serde(default)]
    pub fluctuation: Option<f64>,
    /// Mean over folds and over every valid schedule point.
    #[serde(default)]
    pub mean_r2_overall: Option<f64>,
    /// Mean over folds at the full dataset only.
    #[serde(default)]
    pub r2_full: Option<f64>,
    #[serde(default)]
    pub error_cells: usize,
}

impl MethodTrajectory {
    pub fn valid_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.mean_r2.map(|r| (p.fraction, r)))
            .collect()
    }

    /// Recomputes the summary statistics from the points.
    pub fn compute_stats(&mut self) {
        let valid = self.valid_points();
        self.error_cells = self.points.len() - valid.len();
        let r2: Vec<f64> = valid.iter().map(|p| p.1).collect();
        self.mean_r2_overall = (!r2.is_empty()).then(|| mean(&r2));
        self.r2_full = self
            .points
            .iter()
            .find(|p| p.fraction == 1.0)
            .and_then(|p| p.mean_r2);
        match trend_stats(&valid) {
            Ok(t) => {
                self.slope = Some(t.slope);
                self.intercept = Some(t.intercept);
                self.fluctuation = Some(t.fluctuation);
            }
            Err(_) => {
                self.slope = None;
                self.intercept = None;
                self.fluctuation = None;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub folds: usize,
    pub target_id: String,
    pub horizon: usize,
    pub n_rows: usize,
    pub n_features: usize,
    pub schedule: ShrinkSchedule,
    pub specs: Vec<SelectorSpec>,
    pub prng: String,
    /// Free-form notes: metric bindings, averaging conventions, data source.
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
    /// Snapshot of the driving run configuration, when run from the CLI.
    #[serde(default)]
    pub run_config: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub config: BenchConfig,
    pub trajectories: Vec<MethodTrajectory>,
    #[serde(default)]
    pub rank_by_mean_r2: Vec<Method>,
    #[serde(default)]
    pub rank_by_abs_slope: Vec<Method>,
    #[serde(default)]
    pub rank_by_fluctuation: Vec<Method>,
    #[serde(default)]
    pub composite_rank: Vec<Method>,
}

impl SensitivityReport {
    pub fn trajectory(&self, method: Method) -> Option<&MethodTrajectory> {
        self.trajectories.iter().find(|t| t.method == method)
    }

    pub fn error_cells(&self) -> usize {
        self.trajectories.iter().map(|t| t.error_cells).sum()
    }

    /// 1-based position of `method` in a ranking.
    pub fn position(ranking: &[Method], method: Method) -> Option<usize> {
        ranking.iter().position(|&m| m == method).map(|p| p + 1)
    }
}

/// Seed of one (method, fraction) cell.
pub fn cell_seed(seed: u64, method: Method, fraction: f64) -> u64 {
    derive_seed(seed, method.id(), (fraction * 1e6).round() as u64)
}

fn shrink_seed(seed: u64, fraction: f64) -> u64 {
    derive_seed(seed, "shrink", (fraction * 1e6).round() as u64)
}

/// One cell: shrink, select on the shrunk rows, cross-validate the selection.
pub fn run_cell(
    ds: &AlignedDataset,
    spec: &SelectorSpec,
    fraction: f64,
    policy: ShrinkPolicy,
    seed: u64,
    folds: usize,
) -> TrajectoryPoint {
    let rows = kept_rows(ds.n_rows(), fraction);
    let outcome = (|| {
        let shrunk = shrink_with(ds, fraction, policy, shrink_seed(seed, fraction))?;
        let cell = cell_seed(seed, spec.method, fraction);
        let spec = SelectorSpec {
            seed: cell,
            ..spec.clone()
        };
        let selection = select(&shrunk, &spec)?;
        let cv = kfold_cv(&shrunk, &selection.selected, folds, cell)?;
        Ok::<_, Error>((selection.selected, cv))
    })();
    match outcome {
        Ok((selected, cv)) => TrajectoryPoint {
            fraction,
            rows,
            mean_r2: Some(cv.mean_r2),
            fold_std: Some(cv.std_r2),
            degenerate_folds: cv.degenerate_folds,
            selected,
            error: None,
        },
        Err(e) => TrajectoryPoint {
            fraction,
            rows,
            mean_r2: None,
            fold_std: None,
            degenerate_folds: 0,
            selected: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

pub fn run_benchmark(
    ds: &AlignedDataset,
    specs: &[SelectorSpec],
    schedule: &ShrinkSchedule,
    seed: u64,
    folds: usize,
) -> Result<SensitivityReport> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs at least one method".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for spec in specs {
        if !seen.insert(spec.method) {
            return Err(Error::InvalidArgument(format!("method `{}` listed twice", spec.method)));
        }
        spec.validate(ds.features().n_cols())?;
    }
    let smallest = schedule.fractions.last().copied().unwrap_or(1.0);
    let min_rows = kept_rows(ds.n_rows(), smallest);
    if min_rows < MIN_ROWS.max(folds) {
        return Err(Error::TooFewRows {
            rows: min_rows,
            min: MIN_ROWS.max(folds),
        });
    }

    let cells: Vec<(usize, f64)> = (0..specs.len())
        .flat_map(|m| schedule.fractions.iter().map(move |&f| (m, f)))
        .collect();
    let outcomes: Vec<TrajectoryPoint> = cells
        .par_iter()
        .map(|&(m, f)| run_cell(ds, &specs[m], f, schedule.row_policy, seed, folds))
        .collect();

    let mut outcomes = outcomes.into_iter();
    let trajectories = specs
        .iter()
        .map(|spec| {
            let points: Vec<TrajectoryPoint> = outcomes.by_ref().take(schedule.len()).collect();
            for p in points.iter().filter(|p| p.error.is_some()) {
                log::warn!(
                    "{} at {:.2}: {}",
                    spec.method,
                    p.fraction,
                    p.error.as_deref().unwrap_or_default()
                );
            }
            let mut t = MethodTrajectory {
                method: spec.method,
                points,
                slope: None,
                intercept: None,
                fluctuation: None,
                mean_r2_overall: None,
                r2_full: None,
                error_cells: 0,
            };
            t.compute_stats();
            t
        })
        .collect();

    let mut notes = BTreeMap::new();
    notes.insert("edit_distance".into(), "edr (edit distance on real sequences)".into());
    notes.insert(
        "mean_r2_overall".into(),
        "mean over folds and over every valid schedule point".into(),
    );
    notes.insert("r2_full".into(), "mean over folds at the full dataset".into());
    notes.insert(
        "cross_validation".into(),
        "randomized (non-temporal) folds; rows can leak across time".into(),
    );
    let report = SensitivityReport {
        config: BenchConfig {
            seed,
            folds,
            target_id: ds.target_id().to_string(),
            horizon: ds.horizon(),
            n_rows: ds.n_rows(),
            n_features: ds.features().n_cols(),
            schedule: schedule.clone(),
            specs: specs.to_vec(),
            prng: PRNG_NAME.to_string(),
            notes,
            run_config: None,
        },
        trajectories,
        rank_by_mean_r2: Vec::new(),
        rank_by_abs_slope: Vec::new(),
        rank_by_fluctuation: Vec::new(),
        composite_rank: Vec::new(),
    };
    Ok(rank_methods(report))
}

/// Orders methods by a key (smaller first); missing keys go last, ties by method id.
fn order_by(trajectories: &[MethodTrajectory], key: impl Fn(&MethodTrajectory) -> Option<f64>) -> Vec<Method> {
    let mut items: Vec<(Method, Option<f64>)> = trajectories.iter().map(|t| (t.method, key(t))).collect();
    items.sort_by(|a, b| {
        let ord = match (a.1, b.1) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        ord.then_with(|| a.0.id().cmp(b.0.id()))
    });
    items.into_iter().map(|(m, _)| m).collect()
}

/// Mean R² descending, |slope| ascending, fluctuation ascending, and the
/// composite: sum of the three positions, ascending.
pub fn rank_methods(mut report: SensitivityReport) -> SensitivityReport {
    let t = &report.trajectories;
    report.rank_by_mean_r2 = order_by(t, |m| m.mean_r2_overall.map(|v| -v));
    report.rank_by_abs_slope = order_by(t, |m| m.slope.map(f64::abs));
    report.rank_by_fluctuation = order_by(t, |m| m.fluctuation);
    let total = |m: &MethodTrajectory| {
        [&report.rank_by_mean_r2, &report.rank_by_abs_slope, &report.rank_by_fluctuation]
            .iter()
            .map(|r| SensitivityReport::position(r, m.method).unwrap_or(usize::MAX / 4))
            .sum::<usize>() as f64
    };
    report.composite_rank = order_by(t, |m| Some(total(m)));
    report
}

/// Recomputes per-method statistics and all rankings from the points alone.
pub fn recompute(mut report: SensitivityReport) -> SensitivityReport {
    for t in &mut report.trajectories {
        t.compute_stats();
    }
    rank_methods(report)
}
