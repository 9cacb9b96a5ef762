#![allow(dead_code)]

pub mod oracles;

use chrono::NaiveDate;
use shrinkbench::dataset::{align, build_horizon_target, AlignedDataset, FeatureMatrix, TimeSeries};
use shrinkbench::ingest::{generate_synthetic, SyntheticData, SyntheticSpec};
use shrinkbench::rng::Rng;

/// Series of length 1..=max_len on a coarse grid, so that epsilon matches happen.
pub fn grid_series(rng: &mut Rng, max_len: usize) -> Vec<f64> {
    let n = 1 + rng.below(max_len);
    (0..n).map(|_| (rng.below(21) as f64 - 10.0) / 10.0).collect()
}

pub fn real_series(rng: &mut Rng, min_len: usize, max_len: usize) -> Vec<f64> {
    let n = min_len + rng.below(max_len - min_len + 1);
    (0..n).map(|_| rng.normal()).collect()
}

pub fn dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    (0..n).map(|i| start + chrono::Duration::days(i as i64)).collect()
}

pub fn dataset_from_columns(ids: &[&str], columns: Vec<Vec<f64>>, target: &str, horizon: usize) -> AlignedDataset {
    let n = columns[0].len();
    let m = FeatureMatrix::new(ids.iter().map(|s| s.to_string()).collect(), columns, dates(n)).unwrap();
    build_horizon_target(&m, target, horizon).unwrap()
}

pub fn synthetic(spec: &SyntheticSpec) -> (SyntheticData, AlignedDataset) {
    let data = generate_synthetic(spec).unwrap();
    let m = align(&data.series).unwrap();
    let ds = build_horizon_target(&m, &data.manifest.target_id, spec.horizon).unwrap();
    (data, ds)
}

pub fn series(id: &str, dates: Vec<NaiveDate>, values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(id, dates, values).unwrap()
}

/// Reference SplitMix64, written from the published constants.
pub struct RefSplitMix(pub u64);

impl RefSplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        let u = (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (u * n as f64) as usize
    }
}

impl RefSplitMix {
    pub fn uniform(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Random walks `w00..` plus a target `t` and a leading indicator `x0`
/// with `x0[r] = t[r + 1] + noise`. With horizon 1 the regression target is
/// `x0` up to the noise.
pub fn planted_leading(seed: u64, n: usize, walks: usize, noise: f64) -> AlignedDataset {
    let mut rng = Rng::new(seed);
    let walk = |rng: &mut Rng| {
        let mut v = 0.0;
        (0..n).map(|_| { v += rng.normal(); v }).collect::<Vec<f64>>()
    };
    let t = walk(&mut rng);
    let x0: Vec<f64> = (0..n).map(|r| t[(r + 1).min(n - 1)] + noise * rng.normal()).collect();
    let mut ids = vec!["t".to_string(), "x0".to_string()];
    let mut cols = vec![t, x0];
    for i in 0..walks {
        ids.push(format!("w{i:02}"));
        cols.push(walk(&mut rng));
    }
    let m = FeatureMatrix::new(ids, cols, dates(n)).unwrap();
    build_horizon_target(&m, "t", 1).unwrap()
}
