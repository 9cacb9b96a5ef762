use crate::dataset::{mean, sample_variance, AlignedDataset};

pub(super) fn variance_scores(ds: &AlignedDataset) -> Vec<f64> {
    ds.features()
        .columns()
        .iter()
        .map(|c| sample_variance(c))
        .collect()
}

/// Pearson correlation; zero when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// `|r(x_j, y)|` for every feature column.
pub fn correlation_scores(ds: &AlignedDataset) -> Vec<f64> {
    ds.features()
        .columns()
        .iter()
        .map(|c| pearson(c, ds.y()).abs())
        .collect()
}

/// Equal-frequency bin labels; tied values share the bin of their first occurrence.
fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut labels = vec![0; n];
    let mut prev: Option<(f64, usize)> = None;
    for (pos, &i) in order.iter().enumerate() {
        let bin = match prev {
            Some((v, b)) if v == values[i] => b,
            _ => pos * bins / n,
        };
        labels[i] = bin;
        prev = Some((values[i], bin));
    }
    labels
}

/// Histogram mutual information in nats, `ceil(sqrt(n))` equal-frequency bins per side.
pub fn mutual_information(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let bins = (n as f64).sqrt().ceil() as usize;
    let bx = equal_frequency_bins(x, bins);
    let by = equal_frequency_bins(y, bins);
    let mut joint = vec![0usize; bins * bins];
    let mut px = vec![0usize; bins];
    let mut py = vec![0usize; bins];
    for (&a, &b) in bx.iter().zip(&by) {
        joint[a * bins + b] += 1;
        px[a] += 1;
        py[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (px[a] as f64 * py[b] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

pub(super) fn mutual_information_scores(ds: &AlignedDataset) -> Vec<f64> {
    ds.features()
        .columns()
        .iter()
        .map(|c| mutual_information(c, ds.y()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn pearson_matches_textbook_formula() {
        let mut rng = Rng::new(3);
        let y: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
        for _ in 0..5 {
            let x: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
            // n Σxy - Σx Σy over the product of root terms
            let n = 40.0;
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let sxx: f64 = x.iter().map(|a| a * a).sum();
            let syy: f64 = y.iter().map(|b| b * b).sum();
            let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
            assert!((pearson(&x, &y) - r).abs() < 1e-12);
        }
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn bins_respect_ties() {
        let labels = equal_frequency_bins(&[3.0, 1.0, 2.0, 2.0, 5.0, 4.0], 3);
        // sorted: 1,2,2,3,4,5 -> positions 0..6, bins 0,0,1->0 (tie),1,2,2
        assert_eq!(labels, [1, 0, 0, 0, 2, 2]);
        assert!(equal_frequency_bins(&[7.0; 5], 3).iter().all(|&b| b == 0));
    }

    #[test]
    fn constant_column_has_zero_mi() {
        let y: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        assert_eq!(mutual_information(&[2.0; 30], &y), 0.0);
    }

    #[test]
    fn identical_column_has_entropy_mi() {
        let y: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        // 10 equal bins of 10 -> ln(10)
        assert!((mutual_information(&y, &y) - 10f64.ln()).abs() < 1e-12);
    }
}
