//! Random-forest importance: bootstrap CART regression trees, variance-reduction splits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{id_order, unpermute, ForestParams, SelectorSpec};
use crate::dataset::AlignedDataset;
use crate::error::Result;
use crate::rng::{derive_seed, Rng};

struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a ForestParams,
    mtry: usize,
    importance: Vec<f64>,
    rng: Rng,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn sse(rows: &[usize], y: &[f64]) -> f64 {
    let n = rows.len() as f64;
    let (s, s2) = rows
        .iter()
        .fold((0.0, 0.0), |(s, s2), &r| (s + y[r], s2 + y[r] * y[r]));
    (s2 - s * s / n).max(0.0)
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) {
        let min_leaf = self.params.min_leaf;
        if depth >= self.params.max_depth || rows.len() < 2 * min_leaf {
            return;
        }
        let parent = sse(&rows, self.y);
        if parent <= 0.0 {
            return;
        }
        // candidate features: partial Fisher-Yates over all columns
        let m = self.columns.len();
        let mut features: Vec<usize> = (0..m).collect();
        for i in 0..self.mtry {
            let j = i + self.rng.below(m - i);
            features.swap(i, j);
        }
        let mut best: Option<Split> = None;
        for &f in &features[..self.mtry] {
            if let Some(s) = self.best_split(&rows, f, parent) {
                if best.as_ref().map_or(true, |b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return };
        self.importance[split.feature] += split.gain;
        let col = &self.columns[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| col[r] <= split.threshold);
        self.grow(left, depth + 1);
        self.grow(right, depth + 1);
    }

    fn best_split(&self, rows: &[usize], feature: usize, parent: f64) -> Option<Split> {
        let col = &self.columns[feature];
        let mut sorted = rows.to_vec();
        sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let n = sorted.len();
        let total: f64 = sorted.iter().map(|&r| self.y[r]).sum();
        let total2: f64 = sorted.iter().map(|&r| self.y[r] * self.y[r]).sum();
        let (mut s, mut s2) = (0.0, 0.0);
        let mut best: Option<Split> = None;
        let min_leaf = self.params.min_leaf;
        for i in 0..n - 1 {
            let v = self.y[sorted[i]];
            s += v;
            s2 += v * v;
            let nl = i + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let (a, b) = (col[sorted[i]], col[sorted[i + 1]]);
            if a == b {
                continue;
            }
            let left = (s2 - s * s / nl as f64).max(0.0);
            let (rs, rs2) = (total - s, total2 - s2);
            let right = (rs2 - rs * rs / nr as f64).max(0.0);
            let gain = parent - left - right;
            if gain > 0.0 && best.as_ref().map_or(true, |bs| gain > bs.gain) {
                best = Some(Split {
                    feature,
                    threshold: 0.5 * (a + b),
                    gain,
                });
            }
        }
        best
    }
}

/// Normalized total variance reduction per feature (sums to 1 unless no split was made).
pub fn forest_importance(columns: &[Vec<f64>], y: &[f64], params: &ForestParams, seed: u64) -> Vec<f64> {
    let m = columns.len();
    let n = y.len();
    let mtry = ((m as f64).sqrt().ceil() as usize).clamp(1, m);
    let per_tree: Vec<Vec<f64>> = (0..params.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng::new(derive_seed(seed, "tree", t as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
            let mut builder = TreeBuilder {
                columns,
                y,
                params,
                mtry,
                importance: vec![0.0; m],
                rng,
            };
            builder.grow(rows, 0);
            builder.importance
        })
        .collect();
    let mut total = vec![0.0; m];
    for tree in &per_tree {
        for (acc, v) in total.iter_mut().zip(tree) {
            *acc += v;
        }
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        total.iter_mut().for_each(|v| *v /= sum);
    }
    total
}

pub(super) fn select(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<(Vec<f64>, BTreeMap<String, Value>)> {
    let order = id_order(ds.features().column_ids());
    let columns: Vec<Vec<f64>> = order.iter().map(|&i| ds.features().columns()[i].clone()).collect();
    let importance = unpermute(&order, forest_importance(&columns, ds.y(), &spec.forest_params, spec.seed));
    let mut diag = BTreeMap::new();
    diag.insert("trees".into(), json!(spec.forest_params.trees));
    diag.insert("importance_sum".into(), json!(importance.iter().sum::<f64>()));
    Ok((importance, diag))
}
