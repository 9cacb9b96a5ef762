//! Curve distances on the 2-D point embedding of a series.

use serde::{Deserialize, Serialize};

use super::{check_inputs, embed, MetricParams};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub v: f64,
}

impl Point {
    pub fn dist(self, other: Point) -> f64 {
        (self.t - other.t).hypot(self.v - other.v)
    }
}

/// Symmetric Hausdorff distance, brute force O(nm).
pub fn hausdorff(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let pa = embed(a, p.time_scale);
    let pb = embed(b, p.time_scale);
    Ok(directed_hausdorff(&pa, &pb).max(directed_hausdorff(&pb, &pa)))
}

fn directed_hausdorff(from: &[Point], to: &[Point]) -> f64 {
    from.iter()
        .map(|&x| to.iter().map(|&y| x.dist(y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Discrete Fréchet distance via the coupling recurrence.
pub fn frechet_discrete(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let pa = embed(a, p.time_scale);
    let pb = embed(b, p.time_scale);
    let m = pb.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for (i, &x) in pa.iter().enumerate() {
        for (j, &y) in pb.iter().enumerate() {
            let d = x.dist(y);
            let reach = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[j],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = d.max(reach);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Symmetric segment-path distance: mean point-to-polyline distance, both ways.
pub fn sspd(a: &[f64], b: &[f64], p: &MetricParams) -> Result<f64> {
    check_inputs(a, b)?;
    let pa = embed(a, p.time_scale);
    let pb = embed(b, p.time_scale);
    Ok(0.5 * (segment_path(&pa, &pb) + segment_path(&pb, &pa)))
}

fn segment_path(from: &[Point], path: &[Point]) -> f64 {
    let total: f64 = from.iter().map(|&x| point_to_polyline(x, path)).sum();
    total / from.len() as f64
}

pub(crate) fn point_to_polyline(x: Point, path: &[Point]) -> f64 {
    if path.len() == 1 {
        return x.dist(path[0]);
    }
    path.windows(2)
        .map(|s| point_to_segment(x, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_to_segment(x: Point, s0: Point, s1: Point) -> f64 {
    let (dt, dv) = (s1.t - s0.t, s1.v - s0.v);
    let len2 = dt * dt + dv * dv;
    if len2 == 0.0 {
        return x.dist(s0);
    }
    let u = (((x.t - s0.t) * dt + (x.v - s0.v) * dv) / len2).clamp(0.0, 1.0);
    x.dist(Point {
        t: s0.t + u * dt,
        v: s0.v + u * dv,
    })
}
