mod common;

use common::oracles::normal_equations;
use common::{dataset_from_columns, RefSplitMix};
use proptest::prelude::*;
use shrinkbench::regression::{fit_ols, fold_assignment, kfold_cv, predict, r_squared, CvEngine};
use shrinkbench::rng::Rng;
use shrinkbench::Error;

#[test]
fn ols_matches_normal_equations() {
    let mut rng = Rng::new(1234);
    for _ in 0..100 {
        let n = 30 + rng.below(40);
        let k = 1 + rng.below(6);
        let x: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
        let y: Vec<f64> = (0..n)
            .map(|r| 0.5 + x.iter().enumerate().map(|(j, c)| (j as f64 - 1.5) * c[r]).sum::<f64>() + rng.normal())
            .collect();
        let refs: Vec<&[f64]> = x.iter().map(|c| c.as_slice()).collect();
        let m = fit_ols(&refs, &y, 0.0).unwrap();
        let want = normal_equations(&x, &y);
        assert!((m.intercept - want[0]).abs() <= 1e-8);
        for (b, w) in m.coefficients.iter().zip(&want[1..]) {
            assert!((b - w).abs() <= 1e-8, "{b} vs {w}");
        }
    }
}

#[test]
fn noiseless_linear_data_scores_one_through_cv() {
    let mut rng = Rng::new(5);
    let n = 200;
    let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let t: Vec<f64> = (0..n).map(|r| 2.0 * a[r] - 0.7 * b[r] + 3.0).collect();
    let ds = dataset_from_columns(&["a", "b", "t"], vec![a, b, t], "t", 0);
    let cv = kfold_cv(&ds, &["a".into(), "b".into()], 10, 42).unwrap();
    assert_eq!(cv.fold_r2.len(), 10);
    assert!((cv.mean_r2 - 1.0).abs() <= 1e-9, "{}", cv.mean_r2);
}

#[test]
fn mean_prediction_scores_zero() {
    let y = [1.0, 2.0, 4.0, 8.0, 3.0];
    let m = y.iter().sum::<f64>() / 5.0;
    assert_eq!(r_squared(&y, &[m; 5]).unwrap(), 0.0);
    let y = [2.0, 4.0, 6.0, 8.0];
    assert_eq!(r_squared(&y, &[5.0; 4]).unwrap(), 0.0);
    assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
    assert!(matches!(r_squared(&[3.0; 4], &[3.0; 4]), Err(Error::ZeroVariance)));
}

#[test]
fn fold_assignment_replays_reference_generator() {
    let (n, folds, seed) = (8, 2, 42);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut g = RefSplitMix(seed);
    for i in (1..n).rev() {
        let j = g.below(i + 1);
        perm.swap(i, j);
    }
    let want = vec![perm[..4].to_vec(), perm[4..].to_vec()];
    assert_eq!(fold_assignment(n, folds, seed), want);
}

#[test]
fn fold_sizes_partition_rows() {
    for (n, folds) in [(20, 10), (23, 10), (101, 7)] {
        let parts = fold_assignment(n, folds, 9);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn cv_engine_agrees_with_direct_fits() {
    let mut rng = Rng::new(77);
    let n = 60;
    let cols: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
    let y: Vec<f64> = (0..n).map(|r| cols[0][r] - 2.0 * cols[2][r] + 0.3 * rng.normal()).collect();
    let engine = CvEngine::new(cols.clone(), &y, 5, 3).unwrap();
    let score = engine.score(&[0, 2]).unwrap();
    for (f, test) in fold_assignment(n, 5, 3).iter().enumerate() {
        let train: Vec<usize> = (0..n).filter(|r| !test.contains(r)).collect();
        let pick = |c: &Vec<f64>, rows: &[usize]| rows.iter().map(|&r| c[r]).collect::<Vec<_>>();
        let xtr = [pick(&cols[0], &train), pick(&cols[2], &train)];
        let xte = [pick(&cols[0], test), pick(&cols[2], test)];
        let m = fit_ols(&[&xtr[0], &xtr[1]], &pick(&y, &train), 0.0).unwrap();
        let pred = predict(&m, &[&xte[0], &xte[1]]).unwrap();
        let r2 = r_squared(&pick(&y, test), &pred).unwrap();
        assert!((score.fold_r2[f].unwrap() - r2).abs() <= 1e-9);
    }
}

fn design(seed: u64, n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = Rng::new(seed);
    let cols: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
    let y = (0..n)
        .map(|r| cols.iter().enumerate().map(|(j, c)| c[r] / (j + 1) as f64).sum::<f64>() + rng.normal())
        .collect();
    (cols, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cv_is_invariant_to_column_order(seed in any::<u64>(), rot in 0usize..5) {
        let (cols, y) = design(seed, 50, 5);
        let ids = ["a", "b", "c", "d", "e"];
        let mut cols_t = cols.clone();
        cols_t.push(y.clone());
        let mut ids_t = ids.to_vec();
        ids_t.push("t");
        let ds = dataset_from_columns(&ids_t, cols_t, "t", 0);
        let mut subset: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let base = kfold_cv(&ds, &subset, 10, seed).unwrap();
        subset.rotate_left(rot);
        let rotated = kfold_cv(&ds, &subset, 10, seed).unwrap();
        prop_assert!((base.mean_r2 - rotated.mean_r2).abs() <= 1e-9);
    }

    #[test]
    fn training_r2_grows_with_nested_subsets(seed in any::<u64>()) {
        let (cols, y) = design(seed, 40, 6);
        let engine = CvEngine::new(cols, &y, 10, seed).unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 1..=6 {
            let subset: Vec<usize> = (0..k).collect();
            let r2 = engine.train_r2(&subset).unwrap();
            prop_assert!(r2 >= last - 1e-12);
            last = r2;
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_columns(seed in any::<u64>()) {
        let (cols, y) = design(seed, 30, 3);
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let m = fit_ols(&refs, &y, 0.0).unwrap();
        let pred = predict(&m, &refs).unwrap();
        let res: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        prop_assert!(res.iter().sum::<f64>().abs() <= 1e-9);
        for c in &cols {
            prop_assert!(c.iter().zip(&res).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-9);
        }
    }
}
