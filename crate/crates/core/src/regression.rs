//! Least squares, R² and randomized k-fold cross-validation.
//!
//! Solves always run on centered, unit-norm columns; coefficients are mapped
//! back to the original scale afterwards. In that scaled space every column
//! has squared norm 1, so the rank tolerance and the ridge stabilizer are
//! scale-free.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{mean, AlignedDataset};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Squared pivot below which a scaled design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Ridge stabilizer used when a plain solve is rank deficient:
/// `1e-8 * mean scaled column variance * k`, the variance being 1 for every
/// non-constant column in the unit-norm space.
pub fn default_ridge(k: usize, mean_scaled_variance: f64) -> f64 {
    1e-8 * mean_scaled_variance * k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub ridge_lambda: f64,
}

struct Scaled {
    means: Vec<f64>,
    norms: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

fn scale_columns(x: &[&[f64]]) -> Scaled {
    let mut means = Vec::with_capacity(x.len());
    let mut norms = Vec::with_capacity(x.len());
    let mut columns = Vec::with_capacity(x.len());
    for col in x {
        let mu = mean(col);
        let mut c: Vec<f64> = col.iter().map(|v| v - mu).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            c.iter_mut().for_each(|v| *v /= norm);
        }
        means.push(mu);
        norms.push(norm);
        columns.push(c);
    }
    Scaled {
        means,
        norms,
        columns,
    }
}

fn check_design(x: &[&[f64]], n: usize) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("at least one feature column is required".into()));
    }
    for col in x {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                left: col.len(),
                right: n,
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design contains non-finite values".into()));
        }
    }
    Ok(())
}

/// Minimizes `||y - X b - c||² + ridge_lambda * ||b_scaled||²` with a QR solve.
///
/// The penalty acts on coefficients of the centered unit-norm columns. With
/// `ridge_lambda == 0` a rank-deficient design is an error.
pub fn fit_ols(x: &[&[f64]], y: &[f64], ridge_lambda: f64) -> Result<OlsModel> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("{n} rows, at least 2 required")));
    }
    check_design(x, n)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("target contains non-finite values".into()));
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge_lambda must be >= 0, got {ridge_lambda}"
        )));
    }
    let k = x.len();
    let scaled = scale_columns(x);
    let y_mean = mean(y);
    let extra = if ridge_lambda > 0.0 { k } else { 0 };
    let rows = n + extra;
    let root = ridge_lambda.sqrt();
    let a = DMatrix::from_fn(rows, k, |r, c| {
        if r < n {
            scaled.columns[c][r]
        } else if r - n == c {
            root
        } else {
            0.0
        }
    });
    let b = DVector::from_fn(rows, |r, _| if r < n { y[r] - y_mean } else { 0.0 });

    if rows < k {
        return Err(Error::RankDeficient);
    }
    let qr = a.qr();
    let r = qr.r();
    if ridge_lambda == 0.0 && r.diagonal().iter().any(|d| d * d < RANK_TOL) {
        return Err(Error::RankDeficient);
    }
    let qtb = qr.q().transpose() * b;
    let beta_scaled = r.solve_upper_triangular(&qtb).ok_or(Error::RankDeficient)?;

    let coefficients: Vec<f64> = beta_scaled
        .iter()
        .zip(&scaled.norms)
        .map(|(b, &s)| if s > 0.0 { b / s } else { 0.0 })
        .collect();
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&scaled.means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    if coefficients.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
        return Err(Error::RankDeficient);
    }
    Ok(OlsModel {
        coefficients,
        intercept,
        ridge_lambda,
    })
}

/// Plain fit first, ridge-stabilized refit if the design is rank deficient.
pub fn fit_ols_stabilized(x: &[&[f64]], y: &[f64]) -> Result<OlsModel> {
    match fit_ols(x, y, 0.0) {
        Err(Error::RankDeficient) => {
            let scaled = scale_columns(x);
            let live = scaled.norms.iter().filter(|&&s| s > 0.0).count().max(1);
            let mean_var = live as f64 / x.len() as f64;
            fit_ols(x, y, default_ridge(x.len(), mean_var).max(1e-300))
        }
        other => other,
    }
}

pub fn predict(m: &OlsModel, x: &[&[f64]]) -> Result<Vec<f64>> {
    if x.len() != m.coefficients.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: m.coefficients.len(),
        });
    }
    let n = x.first().map_or(0, |c| c.len());
    if x.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("design columns differ in length".into()));
    }
    Ok((0..n)
        .map(|r| {
            m.intercept
                + x.iter()
                    .zip(&m.coefficients)
                    .map(|(c, b)| c[r] * b)
                    .sum::<f64>()
        })
        .collect())
}

/// `1 - SS_res / SS_tot`.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("r_squared of empty input".into()));
    }
    let m = mean(y_true);
    let ss_tot: f64 = y_true.iter().map(|v| (v - m) * (v - m)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    /// Held-out R² per fold; `None` when the fold's target has zero variance.
    pub fold_r2: Vec<Option<f64>>,
    pub mean_r2: f64,
    pub std_r2: f64,
    pub seed: u64,
    /// Folds excluded from the mean because their R² is undefined.
    pub degenerate_folds: usize,
    /// Folds whose fit needed the ridge stabilizer.
    pub ridge_fallbacks: usize,
}

impl CvScore {
    pub fn has_warning(&self) -> bool {
        self.degenerate_folds > 0
    }
}

/// Shuffles `0..n` with the seeded generator and cuts the permutation into
/// `folds` contiguous parts; the first `n % folds` parts get one extra row.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut perm);
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(perm[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Sufficient statistics of one training split over the whole candidate pool.
struct SplitStats {
    test: Vec<usize>,
    means: Vec<f64>,
    norms: Vec<f64>,
    y_mean: f64,
    y_ss: f64,
    /// Scaled Gram matrix, row-major `pool x pool`.
    gram: Vec<f64>,
    /// Scaled cross products with the centered target.
    cross: Vec<f64>,
}

impl SplitStats {
    fn new(columns: &[Vec<f64>], y: &[f64], train: &[usize], test: Vec<usize>) -> Self {
        let p = columns.len();
        let nt = train.len() as f64;
        let y_mean = train.iter().map(|&r| y[r]).sum::<f64>() / nt;
        let yc: Vec<f64> = train.iter().map(|&r| y[r] - y_mean).collect();
        let mut means = Vec::with_capacity(p);
        let mut norms = Vec::with_capacity(p);
        let mut centered = Vec::with_capacity(p);
        for col in columns {
            let mu = train.iter().map(|&r| col[r]).sum::<f64>() / nt;
            let mut c: Vec<f64> = train.iter().map(|&r| col[r] - mu).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                c.iter_mut().for_each(|v| *v /= norm);
            }
            means.push(mu);
            norms.push(norm);
            centered.push(c);
        }
        let mut gram = vec![0.0; p * p];
        for a in 0..p {
            for b in a..p {
                let g: f64 = centered[a].iter().zip(&centered[b]).map(|(u, v)| u * v).sum();
                gram[a * p + b] = g;
                gram[b * p + a] = g;
            }
        }
        let cross = centered
            .iter()
            .map(|c| c.iter().zip(&yc).map(|(u, v)| u * v).sum())
            .collect();
        Self {
            test,
            means,
            norms,
            y_mean,
            y_ss: yc.iter().map(|v| v * v).sum(),
            gram,
            cross,
        }
    }

    /// Scaled coefficients for `subset` and whether the stabilizer was needed.
    fn solve(&self, subset: &[usize], pool: usize) -> (Vec<f64>, bool) {
        let k = subset.len();
        let g = DMatrix::from_fn(k, k, |i, j| self.gram[subset[i] * pool + subset[j]]);
        let c = DVector::from_fn(k, |i, _| self.cross[subset[i]]);
        if let Some(ch) = g.clone().cholesky() {
            if ch.l_dirty().diagonal().iter().all(|d| d * d >= RANK_TOL) {
                return (ch.solve(&c).iter().copied().collect(), false);
            }
        }
        let live = subset.iter().filter(|&&j| self.norms[j] > 0.0).count().max(1);
        let lambda = default_ridge(k, live as f64 / k as f64);
        let mut g = g;
        for i in 0..k {
            g[(i, i)] += lambda;
        }
        let beta = match g.clone().cholesky() {
            Some(ch) => ch.solve(&c).iter().copied().collect(),
            None => vec![0.0; k],
        };
        (beta, true)
    }
}

/// Cross-validation over a fixed candidate pool with one fold assignment.
///
/// Gram statistics are computed once per split so that scoring any subset of
/// the pool costs a k×k solve plus the held-out predictions.
pub struct CvEngine {
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    seed: u64,
    splits: Vec<SplitStats>,
    full: SplitStats,
}

impl CvEngine {
    pub fn new(columns: Vec<Vec<f64>>, y: &[f64], folds: usize, seed: u64) -> Result<Self> {
        let n = y.len();
        if folds < 2 {
            return Err(Error::InvalidArgument(format!("folds must be >= 2, got {folds}")));
        }
        if n < folds {
            return Err(Error::InvalidArgument(format!(
                "{n} rows cannot be split into {folds} folds"
            )));
        }
        let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
        check_design(&refs, n)?;
        let assignment = fold_assignment(n, folds, seed);
        let mut in_test = vec![usize::MAX; n];
        for (f, rows) in assignment.iter().enumerate() {
            for &r in rows {
                in_test[r] = f;
            }
        }
        let splits = assignment
            .into_iter()
            .enumerate()
            .map(|(f, test)| {
                let train: Vec<usize> = (0..n).filter(|&r| in_test[r] != f).collect();
                SplitStats::new(&columns, y, &train, test)
            })
            .collect();
        let all: Vec<usize> = (0..n).collect();
        let full = SplitStats::new(&columns, y, &all, Vec::new());
        Ok(Self {
            columns,
            y: y.to_vec(),
            seed,
            splits,
            full,
        })
    }

    pub fn pool_size(&self) -> usize {
        self.columns.len()
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::InvalidArgument("feature subset is empty".into()));
        }
        if let Some(&bad) = subset.iter().find(|&&j| j >= self.columns.len()) {
            return Err(Error::InvalidArgument(format!("pool index {bad} out of range")));
        }
        Ok(())
    }

    pub fn score(&self, subset: &[usize]) -> Result<CvScore> {
        self.check_subset(subset)?;
        let p = self.columns.len();
        let mut fold_r2 = Vec::with_capacity(self.splits.len());
        let mut ridge_fallbacks = 0;
        for split in &self.splits {
            let (beta, ridged) = split.solve(subset, p);
            ridge_fallbacks += usize::from(ridged);
            let test_y: Vec<f64> = split.test.iter().map(|&r| self.y[r]).collect();
            let pred: Vec<f64> = split
                .test
                .iter()
                .map(|&r| {
                    let mut v = split.y_mean;
                    for (&j, b) in subset.iter().zip(&beta) {
                        if split.norms[j] > 0.0 {
                            v += b * (self.columns[j][r] - split.means[j]) / split.norms[j];
                        }
                    }
                    v
                })
                .collect();
            fold_r2.push(r_squared(&test_y, &pred).ok());
        }
        summarize(fold_r2, self.seed, ridge_fallbacks)
    }

    /// In-sample R² of the subset fitted on every row.
    pub fn train_r2(&self, subset: &[usize]) -> Result<f64> {
        self.check_subset(subset)?;
        if self.full.y_ss == 0.0 {
            return Err(Error::ZeroVariance);
        }
        let (beta, _) = self.full.solve(subset, self.columns.len());
        let p = self.columns.len();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for (i, &a) in subset.iter().enumerate() {
            lin += beta[i] * self.full.cross[a];
            for (j, &b) in subset.iter().enumerate() {
                quad += beta[i] * beta[j] * self.full.gram[a * p + b];
            }
        }
        let ss_res = (self.full.y_ss - 2.0 * lin + quad).max(0.0);
        Ok(1.0 - ss_res / self.full.y_ss)
    }

    /// Coefficients of the subset fitted on every row, on centered unit-norm columns.
    pub fn scaled_coefficients(&self, subset: &[usize]) -> Result<Vec<f64>> {
        self.check_subset(subset)?;
        Ok(self.full.solve(subset, self.columns.len()).0)
    }
}

fn summarize(fold_r2: Vec<Option<f64>>, seed: u64, ridge_fallbacks: usize) -> Result<CvScore> {
    let valid: Vec<f64> = fold_r2.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::ZeroVariance);
    }
    let mean_r2 = mean(&valid);
    let std_r2 = crate::dataset::sample_variance(&valid).sqrt();
    Ok(CvScore {
        degenerate_folds: fold_r2.len() - valid.len(),
        fold_r2,
        mean_r2,
        std_r2,
        seed,
        ridge_fallbacks,
    })
}

/// Randomized k-fold CV of OLS restricted to `subset`.
pub fn kfold_cv(ds: &AlignedDataset, subset: &[String], folds: usize, seed: u64) -> Result<CvScore> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("feature subset is empty".into()));
    }
    let columns = subset
        .iter()
        .map(|id| ds.features().column(id).map(<[f64]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    let engine = CvEngine::new(columns, ds.y(), folds, seed)?;
    let all: Vec<usize> = (0..subset.len()).collect();
    engine.score(&all)
}
