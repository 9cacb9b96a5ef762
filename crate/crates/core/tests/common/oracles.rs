#![allow(dead_code)]

use shrinkbench::metrics::{embed, MetricParams};

/// Every monotone warping path from (i, j) to the end, minimum total L1 cost.
pub fn dtw_enum(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
    let here = (a[i] - b[j]).abs();
    if i + 1 == a.len() && j + 1 == b.len() {
        return here;
    }
    let mut best = f64::INFINITY;
    for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
        if i + di < a.len() && j + dj < b.len() {
            best = best.min(dtw_enum(a, b, i + di, j + dj));
        }
    }
    here + best
}

/// Longest common subsequence by checking every pair of equal-size index subsets.
pub fn lcss_enum(a: &[f64], b: &[f64], eps: f64) -> usize {
    let pick = |mask: u32, len: usize| -> Vec<usize> { (0..len).filter(|i| mask & (1 << i) != 0).collect() };
    let mut best = 0;
    for ma in 0..(1u32 << a.len()) {
        let ia = pick(ma, a.len());
        if ia.len() <= best {
            continue;
        }
        for mb in 0..(1u32 << b.len()) {
            if mb.count_ones() as usize != ia.len() {
                continue;
            }
            let ib = pick(mb, b.len());
            if ia.iter().zip(&ib).all(|(&x, &y)| (a[x] - b[y]).abs() <= eps) {
                best = ia.len();
                break;
            }
        }
    }
    best
}

/// Minimum over every edit script: match/substitute, delete from a, insert from b.
pub fn edit_enum(a: &[f64], b: &[f64], sub: &dyn Fn(f64, f64) -> f64, gap_a: &dyn Fn(f64) -> f64, gap_b: &dyn Fn(f64) -> f64) -> f64 {
    match (a.split_first(), b.split_first()) {
        (None, None) => 0.0,
        (Some((x, ra)), None) => gap_a(*x) + edit_enum(ra, b, sub, gap_a, gap_b),
        (None, Some((y, rb))) => gap_b(*y) + edit_enum(a, rb, sub, gap_a, gap_b),
        (Some((x, ra)), Some((y, rb))) => (sub(*x, *y) + edit_enum(ra, rb, sub, gap_a, gap_b))
            .min(gap_a(*x) + edit_enum(ra, b, sub, gap_a, gap_b))
            .min(gap_b(*y) + edit_enum(a, rb, sub, gap_a, gap_b)),
    }
}

/// Every order-preserving coupling, minimum of the maximal pair distance.
pub fn frechet_enum(a: &[(f64, f64)], b: &[(f64, f64)], i: usize, j: usize) -> f64 {
    let d = (a[i].0 - b[j].0).hypot(a[i].1 - b[j].1);
    if i + 1 == a.len() && j + 1 == b.len() {
        return d;
    }
    let mut best = f64::INFINITY;
    for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
        if i + di < a.len() && j + dj < b.len() {
            best = best.min(frechet_enum(a, b, i + di, j + dj));
        }
    }
    d.max(best)
}

pub fn points(v: &[f64], p: &MetricParams) -> Vec<(f64, f64)> {
    embed(v, p.time_scale).iter().map(|q| (q.t, q.v)).collect()
}

/// Normal equations with an intercept column, solved by Gaussian elimination
/// with partial pivoting.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let k = x.len() + 1;
    let col = |j: usize, r: usize| if j == 0 { 1.0 } else { x[j - 1][r] };
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = (0..n).map(|r| col(i, r) * col(j, r)).sum();
        }
        a[i][k] = (0..n).map(|r| col(i, r) * y[r]).sum();
    }
    for c in 0..k {
        let piv = (c..k).max_by(|&p, &q| a[p][c].abs().total_cmp(&a[q][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    (0..k).map(|i| a[i][k] / a[i][i]).collect()
}

