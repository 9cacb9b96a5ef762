//! Elastic (alignment-based) measures on one-dimensional series.

use super::{check_inputs, MetricParams};
use crate::error::{Error, Result};

/// Dynamic time warping with L1 step cost and optional Sakoe-Chiba band.
///
/// Returns the raw path cost; no division by path length.
pub fn dtw(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let (n, m) = (a.len(), b.len());
    if let Some(w) = p.dtw_band {
        if n.abs_diff(m) > w {
            return Err(Error::Metric(format!(
                "dtw band {w} admits no warping path between lengths {n} and {m}"
            )));
        }
    }
    let in_band = |i: usize, j: usize| p.dtw_band.map_or(true, |w| i.abs_diff(j) <= w);

    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..n {
        for j in 0..m {
            if !in_band(i, j) {
                cur[j] = f64::INFINITY;
                continue;
            }
            let cost = (a[i] - b[j]).abs();
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[j],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// `1 - L / min(n, m)` where L is the longest common subsequence under
/// `|a_i - b_j| <= epsilon_match`.
pub fn lcss_distance(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let (n, m) = (a.len(), b.len());
    let eps = p.epsilon_match;
    let mut prev = vec![0usize; m + 1];
    let mut cur = vec![0usize; m + 1];
    for i in 1..=n {
        for j in 1..=m {
            cur[j] = if (a[i - 1] - b[j - 1]).abs() <= eps {
                prev[j - 1] + 1
            } else {
                prev[j].max(cur[j - 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(1.0 - prev[m] as f64 / n.min(m) as f64)
}

/// Edit distance on real sequences: unit insert/delete, substitution free
/// within `epsilon_match`, result divided by `max(n, m)`.
pub fn edr(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let (n, m) = (a.len(), b.len());
    let eps = p.epsilon_match;
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; m + 1];
    for i in 1..=n {
        cur[0] = i;
        for j in 1..=m {
            let sub = usize::from((a[i - 1] - b[j - 1]).abs() > eps);
            cur[j] = (prev[j - 1] + sub).min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m] as f64 / n.max(m) as f64)
}

/// Edit distance with real penalty: gaps cost the distance to `gap_ref`.
pub fn erp(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let m = b.len();
    let g = p.gap_ref;
    let mut prev = vec![0.0; m + 1];
    for j in 1..=m {
        prev[j] = prev[j - 1] + (b[j - 1] - g).abs();
    }
    let mut cur = vec![0.0; m + 1];
    for &ai in a {
        let gap_a = (ai - g).abs();
        cur[0] = prev[0] + gap_a;
        for j in 1..=m {
            let matched = prev[j - 1] + (ai - b[j - 1]).abs();
            let skip_a = prev[j] + gap_a;
            let skip_b = cur[j - 1] + (b[j - 1] - g).abs();
            cur[j] = matched.min(skip_a).min(skip_b);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}
