//! Small statistical helpers: Wilson and Student-t intervals, the two-sample
//! Kolmogorov–Smirnov test and a least-squares slope.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` trials.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // rounding can leave p a hair outside at the boundaries
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Two-sided 95% Student-t quantile with `df` degrees of freedom.
pub fn t95(df: f64) -> f64 {
    if df < 1.0 {
        return f64::INFINITY;
    }
    if df > 1000.0 {
        // Cornish-Fisher expansion; the incomplete-beta inversion loses accuracy here
        let z = Z95;
        return z + (z.powi(3) + z) / (4.0 * df);
    }
    StudentsT::new(0.0, 1.0, df)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(Z95)
}

/// Mean with a 95% t-interval. Returns `(mean, lo, hi, standard_error)`.
pub fn t_interval(xs: &[f64]) -> (f64, f64, f64, f64) {
    let (mean, var) = mean_var(xs);
    let se = (var / xs.len() as f64).sqrt();
    let q = t95(xs.len() as f64 - 1.0);
    (mean, mean - q * se, mean + q * se, se)
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * x * x).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS test. Returns `(statistic, asymptotic p-value)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    (d, p)
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wilson_contains_point_estimate() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (500, 1000)] {
            let (lo, hi) = wilson(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}: {lo} {hi}");
        }
        let (lo, hi) = wilson(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (1000.0 + Z95 * Z95)).abs() < 1e-12);
    }

    #[test]
    fn wilson_coverage_on_bernoulli_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [0.01, 0.1, 0.5] {
            let trials = 1000;
            let n = 500;
            let mut covered = 0;
            for _ in 0..trials {
                let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson(k, n, Z95);
                if lo <= p && p <= hi {
                    covered += 1;
                }
            }
            let rate = covered as f64 / trials as f64;
            assert!(rate >= 0.93, "p = {p}: coverage {rate}");
        }
    }

    #[test]
    fn t_quantile_matches_table() {
        assert!((t95(10.0) - 2.228_138_85).abs() < 1e-6);
        assert!((t95(1e6) - Z95).abs() < 1e-4);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Standard table: P(K > 1.36) ~= 0.0494, P(K > 1.63) ~= 0.0098.
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 3e-4);
    }

    #[test]
    fn ks_detects_shift_and_accepts_same_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..4000).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.random()).collect();
        let c: Vec<f64> = (0..4000).map(|_| rng.random::<f64>() + 0.1).collect();
        assert!(ks_two_sample(&a, &b).1 > 0.01);
        assert!(ks_two_sample(&a, &c).1 < 1e-6);
    }

    #[test]
    fn ols_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let (s, i) = ols(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-12 && (i - 3.0).abs() < 1e-12);
    }
}
