//! Lasso by cyclic coordinate descent along a geometric λ path.
//!
//! Objective: `(1 / 2N) ||y - X b||² + λ ||b||₁` on standardized columns and a
//! centered target. Updates run on the covariance form (`XᵀX / N`, `Xᵀy / N`),
//! so a sweep costs O(p) plus O(p) per changed coefficient.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{id_order, tiered, unpermute, SelectorSpec};
use crate::dataset::{mean, AlignedDataset};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub sweeps: usize,
    pub converged: bool,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Runs coordinate descent from the warm start in `beta`.
///
/// `gram` is row-major `p x p` (`XᵀX / N`), `xty` is `Xᵀy / N`. Coordinates
/// with a zero diagonal are pinned at zero. Converged when the largest
/// coefficient change of a sweep is below `tol`.
pub fn coordinate_descent(
    gram: &[f64],
    xty: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
    beta: &mut [f64],
) -> LassoFit {
    let p = xty.len();
    // grad[j] = xty[j] - Σ_l gram[j, l] β_l
    let mut grad: Vec<f64> = (0..p)
        .map(|j| xty[j] - (0..p).map(|l| gram[j * p + l] * beta[l]).sum::<f64>())
        .collect();
    for sweep in 1..=max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let d = gram[j * p + j];
            if d <= 0.0 {
                beta[j] = 0.0;
                continue;
            }
            let old = beta[j];
            let new = soft_threshold(grad[j] + d * old, lambda) / d;
            let change = new - old;
            if change != 0.0 {
                beta[j] = new;
                for (l, g) in grad.iter_mut().enumerate() {
                    *g -= gram[l * p + j] * change;
                }
                max_change = max_change.max(change.abs());
            }
        }
        if max_change < tol {
            return LassoFit {
                sweeps: sweep,
                converged: true,
            };
        }
    }
    LassoFit {
        sweeps: max_sweeps,
        converged: false,
    }
}

/// `len` values from `lambda_max` down to `lambda_max * 1e-3`, geometrically spaced.
pub fn lambda_path(lambda_max: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![lambda_max];
    }
    let ratio = 1e-3f64.powf(1.0 / (len - 1) as f64);
    (0..len).map(|i| lambda_max * ratio.powi(i as i32)).collect()
}

pub(super) fn select(ds: &AlignedDataset, spec: &SelectorSpec) -> Result<(Vec<f64>, BTreeMap<String, Value>)> {
    let params = &spec.lasso_params;
    let order = id_order(ds.features().column_ids());
    let cols: Vec<&Vec<f64>> = order.iter().map(|&i| &ds.features().columns()[i]).collect();
    let n = ds.n_rows() as f64;
    let p = cols.len();
    let y_mean = mean(ds.y());
    let yc: Vec<f64> = ds.y().iter().map(|v| v - y_mean).collect();
    // population standardization so every live column has XᵀX / N = 1
    let standardized: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let mu = mean(c);
            let sd = (c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                c.iter().map(|v| (v - mu) / sd).collect()
            } else {
                vec![0.0; c.len()]
            }
        })
        .collect();
    let mut gram = vec![0.0; p * p];
    for a in 0..p {
        for b in a..p {
            let g = standardized[a].iter().zip(&standardized[b]).map(|(u, v)| u * v).sum::<f64>() / n;
            gram[a * p + b] = g;
            gram[b * p + a] = g;
        }
    }
    let xty: Vec<f64> = standardized
        .iter()
        .map(|c| c.iter().zip(&yc).map(|(u, v)| u * v).sum::<f64>() / n)
        .collect();
    let lambda_max = xty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let path = lambda_path(lambda_max, params.path_len);

    let mut beta = vec![0.0; p];
    let mut coefs = Vec::with_capacity(path.len());
    let mut nnz = Vec::with_capacity(path.len());
    let mut sweeps = Vec::with_capacity(path.len());
    let mut non_converged = 0;
    for &lambda in &path {
        let fit = coordinate_descent(&gram, &xty, lambda, params.tol, params.max_sweeps, &mut beta);
        non_converged += usize::from(!fit.converged);
        sweeps.push(fit.sweeps);
        nnz.push(beta.iter().filter(|b| **b != 0.0).count());
        coefs.push(beta.clone());
    }
    let chosen = (0..path.len())
        .rev()
        .find(|&i| nnz[i] <= spec.k)
        .expect("the head of the path has no active coefficient");
    let next = coefs.get(chosen + 1);
    let scores: Vec<f64> = (0..p)
        .map(|j| {
            let at_chosen = coefs[chosen][j];
            let at_next = next.map_or(0.0, |c| c[j]);
            if at_chosen != 0.0 {
                tiered(2, at_chosen)
            } else if at_next != 0.0 {
                tiered(1, at_next)
            } else {
                tiered(0, xty[j])
            }
        })
        .collect();

    let mut diag = BTreeMap::new();
    diag.insert("lambda_max".into(), json!(lambda_max));
    diag.insert("lambda_chosen".into(), json!(path[chosen]));
    diag.insert("path_index".into(), json!(chosen));
    diag.insert("nnz_path".into(), json!(nnz));
    diag.insert("sweeps".into(), json!(sweeps));
    diag.insert("non_converged".into(), json!(non_converged));
    diag.insert("converged".into(), json!(non_converged == 0));
    Ok((unpermute(&order, scores), diag))
}
