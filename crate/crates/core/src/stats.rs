//! Small statistics toolkit: summaries, Kolmogorov–Smirnov and chi-square homogeneity.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary { count, mean: f64::NAN, std_dev: f64::NAN, std_error: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let var = if count > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
    } else {
        0.0
    };
    let std_dev = var.sqrt();
    Summary { count, mean, std_dev, std_error: std_dev / (count as f64).sqrt() }
}

/// `sup |F_n − F|` against a continuous reference cdf.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    best
}

/// Asymptotic 1% critical value of the one-sample statistic.
pub fn ks_critical_one_sample(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Asymptotic 1% critical value of the two-sample statistic.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square homogeneity test of two count histograms over the same categories.
/// Categories empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareResult {
    let len = a.len().max(b.len());
    let get = |v: &[u64], k: usize| v.get(k).copied().unwrap_or(0) as f64;
    let (na, nb): (f64, f64) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut stat = 0.0;
    let mut used = 0usize;
    for k in 0..len {
        let col = get(a, k) + get(b, k);
        if col == 0.0 {
            continue;
        }
        used += 1;
        for (obs, rowsum) in [(get(a, k), na), (get(b, k), nb)] {
            let expected = rowsum * col / total;
            if expected > 0.0 {
                stat += (obs - expected).powi(2) / expected;
            }
        }
    }
    let dof = used.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).map(|d| d.cdf(stat)).unwrap_or(0.0)
    };
    ChiSquareResult { statistic: stat, dof, p_value }
}

/// Merges trailing categories until each pooled expected count reaches `min_expected`.
pub fn pool_tail(a: &[u64], b: &[u64], min_expected: f64) -> (Vec<u64>, Vec<u64>) {
    let len = a.len().max(b.len());
    let get = |v: &[u64], k: usize| v.get(k).copied().unwrap_or(0);
    let total = (a.iter().sum::<u64>() + b.iter().sum::<u64>()) as f64;
    let frac = |c: u64| c as f64 / total * (a.iter().sum::<u64>().min(b.iter().sum::<u64>())) as f64;
    let mut out_a = Vec::new();
    let mut out_b = Vec::new();
    let mut acc = (0u64, 0u64);
    for k in (0..len).rev() {
        acc.0 += get(a, k);
        acc.1 += get(b, k);
        if frac(acc.0 + acc.1) >= min_expected || k == 0 {
            out_a.push(acc.0);
            out_b.push(acc.1);
            acc = (0, 0);
        }
    }
    out_a.reverse();
    out_b.reverse();
    (out_a, out_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn summary_examples() {
        let s = summarize(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_dev - 1.0).abs() < 1e-15);
        assert!(summarize(&[]).mean.is_nan());
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_one_sample(&[0.5], |x| x) - 0.5).abs() < 1e-15);
        let mut rng = rng_from_seed(1);
        let u: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
        assert!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0)) < ks_critical_one_sample(u.len()));
        let v: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>().powf(1.3)).collect();
        assert!(ks_two_sample(&u, &v) > ks_critical_two_sample(u.len(), v.len()));
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square_homogeneity(&[50, 50], &[50, 50]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 1);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        // 2x2 table with a known statistic: (90,10) vs (60,40) gives 24.0
        let r = chi_square_homogeneity(&[90, 10], &[60, 40]);
        assert!((r.statistic - 24.0).abs() < 1e-12);
        assert!(r.p_value < 1e-5);
        let (a, b) = pool_tail(&[100, 50, 3, 1], &[100, 50, 2, 0], 5.0);
        assert_eq!((a, b), (vec![100, 54], vec![100, 52]));
    }
}
