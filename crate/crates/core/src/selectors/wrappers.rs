//! Search-based selectors scored by cross-validated R².
//!
//! All wrappers search a prescreened pool: the top `wrapper_prescreen`
//! features by absolute correlation with the target. One fold assignment,
//! seeded from the spec, is shared by every evaluation of a search.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{correlation_scores, ranking, tiered, SelectorSpec};
use crate::dataset::AlignedDataset;
use crate::error::Result;
use crate::regression::CvEngine;
use crate::rng::Rng;

type Scored = (Vec<f64>, BTreeMap<String, Value>);

/// Minimum CV gain for a stepwise drop.
pub const STEPWISE_MIN_GAIN: f64 = 1e-6;

struct Pool {
    /// Feature indices of the pool, ordered by id.
    members: Vec<usize>,
    ids: Vec<String>,
    corr: Vec<f64>,
    engine: CvEngine,
}

impl Pool {
    fn new(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<Self> {
        let all_ids = ds.features().column_ids();
        let corr = correlation_scores(ds);
        let size = spec.wrapper_prescreen.min(all_ids.len());
        let mut members: Vec<usize> = ranking(all_ids, &corr).into_iter().take(size).collect();
        members.sort_by(|&a, &b| all_ids[a].cmp(&all_ids[b]));
        let columns = members
            .iter()
            .map(|&j| ds.features().columns()[j].clone())
            .collect();
        let engine = CvEngine::new(columns, ds.y(), spec.folds, spec.seed)?;
        Ok(Self {
            ids: members.iter().map(|&j| all_ids[j].clone()).collect(),
            members,
            corr,
            engine,
        })
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn objective(&self, subset: &[usize]) -> f64 {
        self.engine
            .score(subset)
            .map_or(f64::NEG_INFINITY, |s| s.mean_r2)
    }

    /// Scores for every feature: pool members get `pool_score`, others tier 0 by |r|.
    fn scores(&self, pool_score: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut scores: Vec<f64> = self.corr.iter().map(|&r| tiered(0, r)).collect();
        for (p, &j) in self.members.iter().enumerate() {
            scores[j] = pool_score(p);
        }
        scores
    }

    fn names(&self, subset: &[usize]) -> Vec<String> {
        subset.iter().map(|&p| self.ids[p].clone()).collect()
    }

    /// Best addition to `current`; ties keep the first pool position.
    fn best_addition(&self, current: &[usize], skip: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut trial = current.to_vec();
        for c in 0..self.len() {
            if current.contains(&c) || skip.contains(&c) {
                continue;
            }
            trial.push(c);
            let v = self.objective(&trial);
            trial.pop();
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        best
    }

    /// Best single removal from `current` (by position); ties keep the first id.
    fn best_removal(&self, current: &[usize], protect: Option<usize>) -> Option<(usize, f64)> {
        let mut order: Vec<usize> = (0..current.len()).collect();
        order.sort_by_key(|&i| current[i]);
        let mut best: Option<(usize, f64)> = None;
        for pos in order {
            if Some(current[pos]) == protect {
                continue;
            }
            let trial: Vec<usize> = current
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, &c)| c)
                .collect();
            let v = self.objective(&trial);
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((pos, v));
            }
        }
        best
    }
}

fn order_scores(pool: &Pool, chosen: &[usize]) -> Vec<f64> {
    let k = chosen.len();
    pool.scores(|p| match chosen.iter().position(|&c| c == p) {
        Some(i) => tiered(2, (k - i) as f64),
        None => tiered(1, pool.corr[pool.members[p]]),
    })
}

pub(super) fn forward(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<Scored> {
    let pool = Pool::new(ds, spec)?;
    let mut chosen = Vec::with_capacity(spec.k);
    let mut cv_trace = Vec::new();
    let mut train_trace = Vec::new();
    while chosen.len() < spec.k {
        let (c, v) = pool
            .best_addition(&chosen, &[])
            .expect("pool holds at least k features");
        chosen.push(c);
        cv_trace.push(v);
        train_trace.push(pool.engine.train_r2(&chosen).unwrap_or(f64::NAN));
    }
    let mut diag = BTreeMap::new();
    diag.insert("pool_size".into(), json!(pool.len()));
    diag.insert("added".into(), json!(pool.names(&chosen)));
    diag.insert("cv_r2_trace".into(), json!(cv_trace));
    diag.insert("train_r2_trace".into(), json!(train_trace));
    Ok((order_scores(&pool, &chosen), diag))
}

pub(super) fn backward(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<Scored> {
    let pool = Pool::new(ds, spec)?;
    let mut current: Vec<usize> = (0..pool.len()).collect();
    let mut eliminated = Vec::new();
    let mut cv_trace = Vec::new();
    while current.len() > spec.k {
        let (pos, v) = pool.best_removal(&current, None).expect("non-empty subset");
        eliminated.push(current.remove(pos));
        cv_trace.push(v);
    }
    let scores = pool.scores(|p| match eliminated.iter().position(|&e| e == p) {
        Some(step) => tiered(1, (step + 1) as f64),
        None => tiered(2, 0.0),
    });
    let mut diag = BTreeMap::new();
    diag.insert("pool_size".into(), json!(pool.len()));
    diag.insert("eliminated".into(), json!(pool.names(&eliminated)));
    diag.insert("cv_r2_trace".into(), json!(cv_trace));
    Ok((scores, diag))
}

pub(super) fn stepwise(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<Scored> {
    let pool = Pool::new(ds, spec)?;
    let cap = 10 * spec.k;
    let mut current: Vec<usize> = Vec::new();
    let mut drops = Vec::new();
    let mut iterations = 0;
    let mut cap_hit = false;
    loop {
        if iterations == cap {
            cap_hit = true;
            break;
        }
        iterations += 1;
        let added = if current.len() < spec.k {
            let (c, _) = pool.best_addition(&current, &[]).expect("pool holds at least k features");
            current.push(c);
            Some(c)
        } else {
            None
        };
        let mut dropped_any = false;
        while current.len() > 1 {
            let base = pool.objective(&current);
            match pool.best_removal(&current, added) {
                Some((pos, v)) if v > base + STEPWISE_MIN_GAIN => {
                    drops.push(pool.ids[current.remove(pos)].clone());
                    dropped_any = true;
                }
                _ => break,
            }
        }
        if current.len() == spec.k && !dropped_any {
            break;
        }
    }
    // the cap can stop the search short of k; finish greedily
    while current.len() < spec.k {
        let (c, _) = pool.best_addition(&current, &[]).expect("pool holds at least k features");
        current.push(c);
    }
    let mut diag = BTreeMap::new();
    diag.insert("pool_size".into(), json!(pool.len()));
    diag.insert("iterations".into(), json!(iterations));
    diag.insert("cap_hit".into(), json!(cap_hit));
    diag.insert("dropped".into(), json!(drops));
    diag.insert("final_cv_r2".into(), json!(pool.objective(&current)));
    Ok((order_scores(&pool, &current), diag))
}

pub(super) fn rfe(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<Scored> {
    let pool = Pool::new(ds, spec)?;
    let mut current: Vec<usize> = (0..pool.len()).collect();
    let mut eliminated = Vec::new();
    while current.len() > spec.k {
        let coef = pool.engine.scaled_coefficients(&current)?;
        let mut worst = 0;
        for i in 1..current.len() {
            if coef[i].abs() < coef[worst].abs() {
                worst = i;
            }
        }
        eliminated.push(current.remove(worst));
    }
    let final_coef = pool.engine.scaled_coefficients(&current)?;
    let scores = pool.scores(|p| {
        if let Some(i) = current.iter().position(|&c| c == p) {
            tiered(2, final_coef[i])
        } else {
            let step = eliminated.iter().position(|&e| e == p).expect("every pool member is kept or eliminated");
            tiered(1, (step + 1) as f64)
        }
    });
    let mut diag = BTreeMap::new();
    diag.insert("pool_size".into(), json!(pool.len()));
    diag.insert("elimination_order".into(), json!(pool.names(&eliminated)));
    Ok((scores, diag))
}

/// Swap-neighbourhood annealing over k-subsets of the pool.
///
/// Stream layout: one Fisher-Yates shuffle of the pool for the initial
/// subset, then per iteration `below(k)`, `below(pool - k)`, `uniform()`.
pub(super) fn simulated_annealing(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<Scored> {
    let pool = Pool::new(ds, spec)?;
    let params = &spec.sa_params;
    let k = spec.k;
    let mut rng = Rng::new(spec.seed);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    rng.shuffle(&mut order);
    let mut inside: Vec<usize> = order[..k].to_vec();
    let mut outside: Vec<usize> = order[k..].to_vec();
    let mut current = pool.objective(&inside);
    let mut best = (inside.clone(), current);
    let mut temperature = params.t0;
    let mut trace = Vec::with_capacity(params.iters);
    if !outside.is_empty() {
        for _ in 0..params.iters {
            let i = rng.below(k);
            let j = rng.below(outside.len());
            let u = rng.uniform();
            let mut candidate = inside.clone();
            candidate[i] = outside[j];
            let value = pool.objective(&candidate);
            let delta = value - current;
            let accepted = delta > 0.0 || u < (delta / temperature).exp();
            trace.push(json!({
                "i": i,
                "j": j,
                "u": u,
                "delta": delta,
                "temperature": temperature,
                "accepted": accepted,
            }));
            if accepted {
                std::mem::swap(&mut inside[i], &mut outside[j]);
                current = value;
                if current > best.1 {
                    best = (inside.clone(), current);
                }
            }
            temperature *= params.alpha;
        }
    }
    let (chosen, best_value) = best;
    let scores = pool.scores(|p| {
        if chosen.contains(&p) {
            tiered(2, 0.0)
        } else {
            tiered(1, pool.corr[pool.members[p]])
        }
    });
    let mut diag = BTreeMap::new();
    diag.insert("pool_size".into(), json!(pool.len()));
    diag.insert("initial".into(), json!(pool.names(&order[..k])));
    diag.insert("best_cv_r2".into(), json!(best_value));
    diag.insert("trace_len".into(), json!(trace.len()));
    diag.insert("trace".into(), Value::Array(trace));
    Ok((scores, diag))
}
