//! Kolmogorov-Smirnov distances and asymptotic critical values, used to
//! compare empirical jump-time laws across engines.

/// Asymptotic coefficient `c(alpha) = sqrt(-ln(alpha/2) / 2)` of the
/// Kolmogorov distribution; `c(0.01) = 1.6276236307187293`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1), got {alpha}");
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Two-sample critical value at level `alpha` for sample sizes `n` and `m`:
/// `c(alpha) * sqrt((n + m) / (n m))`. The two laws are distinguishable at
/// level `alpha` when the statistic exceeds this.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    assert!(n > 0 && m > 0, "sample sizes must be positive");
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// One-sample critical value at level `alpha` for sample size `n`:
/// `c(alpha) / sqrt(n)`.
pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    assert!(n > 0, "sample size must be positive");
    ks_coefficient(alpha) / (n as f64).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    assert!(!xs.is_empty(), "samples must be non-empty");
    assert!(xs.iter().all(|x| !x.is_nan()), "samples must not contain NaN");
    let mut v = xs.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest absolute gap
/// between the two empirical distribution functions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted(a);
    let b = sorted(b);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n);
        d = d.max((i + 1) as f64 / n - f);
    }
    d
}
