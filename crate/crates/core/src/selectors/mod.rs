//! Feature selectors behind one interface.
//!
//! Every selector publishes a score per candidate feature (higher is better)
//! and the selection is always the top `k` of those scores, ties going to the
//! lexicographically smaller feature id. Methods whose natural output is a set
//! or an ordering (wrappers, lasso) encode it in tiered scores: the integer
//! part is a tier, the fractional part a within-tier magnitude.

mod filters;
mod forest;
mod lasso;
mod similarity;
mod wrappers;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::AlignedDataset;
use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricParams};

pub use filters::{correlation_scores, mutual_information, pearson};
pub use forest::forest_importance;
pub use lasso::{coordinate_descent, lambda_path, LassoFit};
pub use similarity::similarity_scores;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Var,
    Cor,
    MutualInformation,
    Forward,
    Backward,
    Stepwise,
    Rfe,
    Simulated,
    Lasso,
    TreeBase,
    Eu,
    Dtw,
    Hausdorff,
    Frechet,
    EditDistance,
    Lcss,
    Erp,
    Sspd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Filter,
    Wrapper,
    Embedded,
    Similarity,
}

impl Family {
    pub fn id(self) -> &'static str {
        match self {
            Family::Filter => "filters",
            Family::Wrapper => "wrappers",
            Family::Embedded => "embedded",
            Family::Similarity => "similarity",
        }
    }
}

impl Method {
    /// The fifteen methods benchmarked by default.
    pub const DEFAULT: [Method; 15] = [
        Method::Var,
        Method::Cor,
        Method::MutualInformation,
        Method::Forward,
        Method::Backward,
        Method::Stepwise,
        Method::Rfe,
        Method::Simulated,
        Method::Lasso,
        Method::TreeBase,
        Method::Eu,
        Method::Dtw,
        Method::Hausdorff,
        Method::Frechet,
        Method::EditDistance,
    ];

    pub const EXTRA: [Method; 3] = [Method::Lcss, Method::Erp, Method::Sspd];

    pub fn id(self) -> &'static str {
        match self {
            Method::Var => "var",
            Method::Cor => "cor",
            Method::MutualInformation => "mutual_information",
            Method::Forward => "forward",
            Method::Backward => "backward",
            Method::Stepwise => "stepwise",
            Method::Rfe => "rfe",
            Method::Simulated => "simulated",
            Method::Lasso => "lasso",
            Method::TreeBase => "tree_base",
            Method::Eu => "eu",
            Method::Dtw => "dtw",
            Method::Hausdorff => "hausdorff",
            Method::Frechet => "frechet",
            Method::EditDistance => "edit_distance",
            Method::Lcss => "lcss",
            Method::Erp => "erp",
            Method::Sspd => "sspd",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Method::Var | Method::Cor | Method::MutualInformation => Family::Filter,
            Method::Forward | Method::Backward | Method::Stepwise | Method::Rfe | Method::Simulated => {
                Family::Wrapper
            }
            Method::Lasso | Method::TreeBase => Family::Embedded,
            _ => Family::Similarity,
        }
    }

    /// Distance measure behind a similarity selector. `edit_distance` is EDR.
    pub fn metric(self) -> Option<Metric> {
        Some(match self {
            Method::Eu => Metric::Euclidean,
            Method::Dtw => Metric::Dtw,
            Method::Hausdorff => Metric::Hausdorff,
            Method::Frechet => Metric::Frechet,
            Method::EditDistance => Metric::Edr,
            Method::Lcss => Metric::Lcss,
            Method::Erp => Metric::Erp,
            Method::Sspd => Metric::Sspd,
            _ => return None,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::DEFAULT
            .iter()
            .chain(&Method::EXTRA)
            .copied()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub t0: f64,
    pub alpha: f64,
    pub iters: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            t0: 0.01,
            alpha: 0.95,
            iters: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoParams {
    pub path_len: usize,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoParams {
    fn default() -> Self {
        Self {
            path_len: 50,
            tol: 1e-6,
            max_sweeps: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: 8,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorSpec {
    pub method: Method,
    pub k: usize,
    pub seed: u64,
    pub metric_params: MetricParams,
    pub wrapper_prescreen: usize,
    /// Folds of the cross-validation objective used by wrappers.
    pub folds: usize,
    pub sa_params: SaParams,
    pub lasso_params: LassoParams,
    pub forest_params: ForestParams,
}

impl SelectorSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k: 10,
            seed: 0,
            metric_params: MetricParams::default(),
            wrapper_prescreen: 50,
            folds: 10,
            sa_params: SaParams::default(),
            lasso_params: LassoParams::default(),
            forest_params: ForestParams::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.k == 0 || self.k > n_features {
            return Err(Error::InvalidArgument(format!(
                "k must be in 1..={n_features}, got {}",
                self.k
            )));
        }
        if self.wrapper_prescreen < self.k {
            return Err(Error::InvalidArgument(format!(
                "wrapper_prescreen ({}) must be >= k ({})",
                self.wrapper_prescreen, self.k
            )));
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be >= 2".into()));
        }
        self.metric_params.validate()?;
        let sa = &self.sa_params;
        if !(sa.t0 > 0.0 && sa.alpha > 0.0 && sa.alpha <= 1.0) {
            return Err(Error::InvalidArgument(
                "annealing needs t0 > 0 and alpha in (0, 1]".into(),
            ));
        }
        let l = &self.lasso_params;
        if l.path_len == 0 || !(l.tol > 0.0) || l.max_sweeps == 0 {
            return Err(Error::InvalidArgument(
                "lasso needs path_len >= 1, tol > 0, max_sweeps >= 1".into(),
            ));
        }
        let f = &self.forest_params;
        if f.trees == 0 || f.min_leaf == 0 || f.max_depth == 0 {
            return Err(Error::InvalidArgument(
                "forest needs trees, max_depth and min_leaf >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub selected: Vec<String>,
    pub scores: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, Value>,
}

pub fn select(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<SelectionResult> {
    spec.validate(ds.features().n_cols())?;
    let (scores, diagnostics) = match spec.method {
        Method::Var => (filters::variance_scores(ds), BTreeMap::new()),
        Method::Cor => (correlation_scores(ds), BTreeMap::new()),
        Method::MutualInformation => (filters::mutual_information_scores(ds), BTreeMap::new()),
        Method::Forward => wrappers::forward(ds, spec)?,
        Method::Backward => wrappers::backward(ds, spec)?,
        Method::Stepwise => wrappers::stepwise(ds, spec)?,
        Method::Rfe => wrappers::rfe(ds, spec)?,
        Method::Simulated => wrappers::simulated_annealing(ds, spec)?,
        Method::Lasso => lasso::select(ds, spec)?,
        Method::TreeBase => forest::select(ds, spec)?,
        m => {
            let metric = m.metric().expect("remaining methods are similarity based");
            let mut diag = BTreeMap::new();
            diag.insert("metric".to_string(), serde_json::to_value(metric)?);
            (similarity_scores(ds, metric, &spec.metric_params)?, diag)
        }
    };
    let ids = ds.features().column_ids();
    let selected = top_k(ids, &scores, spec.k);
    Ok(SelectionResult {
        method: spec.method,
        selected,
        scores: ids.iter().cloned().zip(scores).collect(),
        diagnostics,
    })
}

/// Indices sorted by descending score, ties by ascending id.
pub(crate) fn ranking(ids: &[String], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
    order
}

/// Column indices in ascending id order, so seeded searches do not depend on
/// the order columns arrived in.
pub(crate) fn id_order(ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    order
}

/// Scatters values computed in `order` back to column positions.
pub(crate) fn unpermute(order: &[usize], values: Vec<f64>) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for (v, &i) in values.into_iter().zip(order) {
        out[i] = v;
    }
    out
}

pub fn top_k(ids: &[String], scores: &[f64], k: usize) -> Vec<String> {
    ranking(ids, scores)
        .into_iter()
        .take(k)
        .map(|i| ids[i].clone())
        .collect()
}

/// `tier + m / (1 + m)` for a non-negative magnitude `m`.
pub(crate) fn tiered(tier: u32, magnitude: f64) -> f64 {
    let m = magnitude.abs();
    let frac = if m.is_finite() { m / (1.0 + m) } else { 1.0 - f64::EPSILON };
    f64::from(tier) + frac
}
