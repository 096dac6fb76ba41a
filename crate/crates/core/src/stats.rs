//! Goodness-of-fit statistics used by the verification suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};
use crate::special::{ln_poisson_pmf, ln_poisson_sf};

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
///
/// Ties (within and across samples) are handled by advancing past every copy
/// of a value before comparing the empirical CDFs, which matters here because
/// `X` has an atom at 1.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("KS test needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(invalid("KS test input contains NaN"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
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
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic critical value of the two-sample KS statistic at level `alpha`:
/// `sqrt(-ln(alpha/2) / 2) * sqrt((n + m) / (n m))`.
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub critical_value: f64,
}

impl ChiSquareResult {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical_value
    }
}

/// Pearson chi-square test of observed counts against `Pois(mean)`.
///
/// Bins are `{0}, {1}, ...` while each keeps an expected count of at least 5;
/// the last bin absorbs the upper tail.
pub fn chi_square_poisson(counts: &[u64], mean: f64, level: f64) -> Result<ChiSquareResult> {
    if counts.is_empty() {
        return Err(invalid("chi-square test needs observations"));
    }
    let total = counts.len() as f64;
    let max_obs = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0u64; max_obs as usize + 1];
    for &c in counts {
        observed[c as usize] += 1;
    }

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut k = 0u64;
    loop {
        let expected = total * ln_poisson_pmf(k, mean).exp();
        let rest = total * ln_poisson_sf(k + 1, mean).exp();
        if expected < 5.0 || rest < 5.0 {
            let tail_expected = total * ln_poisson_sf(k, mean).exp();
            let tail_observed: u64 = observed.iter().skip(k as usize).sum();
            bins.push((tail_observed as f64, tail_expected));
            break;
        }
        let obs = observed.get(k as usize).copied().unwrap_or(0);
        bins.push((obs as f64, expected));
        k += 1;
    }
    if bins.len() < 2 {
        return Err(invalid("too few observations for a chi-square test"));
    }
    let statistic = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = bins.len() - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        degrees_of_freedom: df,
        critical_value: dist.inverse_cdf(1.0 - level),
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut n = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in xs {
        n += 1.0;
        let delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }
    if n < 2.0 {
        return (mean, f64::NAN);
    }
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]).unwrap(), 1.0);
    }

    #[test]
    fn ks_ties_are_not_split() {
        // Both samples put half their mass at 1.0.
        let a = [0.1, 0.2, 1.0, 1.0];
        let b = [0.15, 0.25, 1.0, 1.0];
        assert!((ks_two_sample(&a, &b).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ks_hand_example() {
        // F_a jumps at 1,2; F_b at 1.5. sup at x in [1, 1.5): |0.5 - 0| = 0.5
        let d = ks_two_sample(&[1.0, 2.0], &[1.5]).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn critical_value_matches_table() {
        // c(0.001) = 1.9495
        let c = ks_critical_value(0.001, 100_000, 100_000);
        assert!((c - 1.94947 * (2e-5f64).sqrt()).abs() < 1e-6);
        assert!((c - 0.00872).abs() < 1e-5);
    }

    #[test]
    fn chi_square_accepts_exact_frequencies() {
        // Counts laid out in proportion to the pmf.
        let mut counts = Vec::new();
        for (k, n) in [(0u64, 3679), (1, 3679), (2, 1839), (3, 613), (4, 153), (5, 31), (6, 5), (7, 1)] {
            counts.extend(std::iter::repeat_n(k, n));
        }
        let r = chi_square_poisson(&counts, 1.0, 0.001).unwrap();
        assert!(r.passes(), "{r:?}");
        let shifted: Vec<u64> = counts.iter().map(|k| k + 1).collect();
        assert!(!chi_square_poisson(&shifted, 1.0, 0.001).unwrap().passes());
    }

    #[test]
    fn mean_se_basic() {
        let (m, se) = mean_and_se([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (1.666_666_666_666_666_7f64 / 4.0).sqrt()).abs() < 1e-12);
    }
}
