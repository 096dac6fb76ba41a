//! Log-domain Poisson terms and series accumulation.

use statrs::function::factorial::ln_factorial;

/// Relative size below which a series term no longer matters.
pub const SERIES_REL_CUTOFF: f64 = 1e-18;

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x <= 0`.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln P(Y = k)` for `Y ~ Pois(mean)`; `mean = 0` is the point mass at 0.
pub fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * mean.ln() - mean - ln_factorial(k)
}

/// `ln P(Y >= k)` for `Y ~ Pois(mean)`.
pub fn ln_poisson_sf(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if mean == 0.0 {
        return f64::NEG_INFINITY;
    }
    if (k as f64) <= mean {
        // Below the mean the lower sum is at most about one half, so the
        // complement keeps full relative precision.
        let mut ln_lower = f64::NEG_INFINITY;
        for j in 0..k {
            ln_lower = log_add_exp(ln_lower, ln_poisson_pmf(j, mean));
        }
        return log1m_exp(ln_lower);
    }
    // Above the mean the terms shrink at least geometrically.
    let mut ln_sum = f64::NEG_INFINITY;
    let mut j = k;
    loop {
        let term = ln_poisson_pmf(j, mean);
        ln_sum = log_add_exp(ln_sum, term);
        if term == f64::NEG_INFINITY || term < ln_sum + SERIES_REL_CUTOFF.ln() {
            return ln_sum;
        }
        j += 1;
    }
}

/// `ln P(Y <= k)` for `Y ~ Pois(mean)`.
pub fn ln_poisson_cdf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    if (k as f64) < mean {
        let mut ln_sum = f64::NEG_INFINITY;
        for j in 0..=k {
            ln_sum = log_add_exp(ln_sum, ln_poisson_pmf(j, mean));
        }
        ln_sum
    } else {
        log1m_exp(ln_poisson_sf(k + 1, mean))
    }
}

/// Sums `exp(term(k))` for `k = start, start+1, ...` in the log domain.
///
/// Stops once `k` is past `mean + 10 sqrt(mean + 1)` (the bulk of the weight
/// distribution), the current term is below `SERIES_REL_CUTOFF` times the
/// running sum, and terms have started to decrease. Returns the log of the sum.
pub fn log_series(mean: f64, start: u64, mut term: impl FnMut(u64) -> f64) -> f64 {
    let past_bulk = mean + 10.0 * (mean + 1.0).sqrt();
    let ln_cut = SERIES_REL_CUTOFF.ln();
    let mut ln_sum = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    let mut k = start;
    loop {
        let t = term(k);
        ln_sum = log_add_exp(ln_sum, t);
        if (k as f64) > past_bulk
            && (t == f64::NEG_INFINITY || (t < ln_sum + ln_cut && t <= prev))
        {
            return ln_sum;
        }
        prev = t;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf_by_recurrence(mean: f64, upto: usize) -> Vec<f64> {
        let mut p = vec![(-mean).exp()];
        for j in 1..=upto {
            let last = p[j - 1];
            p.push(last * mean / j as f64);
        }
        p
    }

    #[test]
    fn pmf_matches_recurrence() {
        for &mean in &[0.1, 1.0, 4.5, 20.0] {
            let p = pmf_by_recurrence(mean, 60);
            for (k, &pk) in p.iter().enumerate() {
                let got = ln_poisson_pmf(k as u64, mean).exp();
                assert!((got - pk).abs() <= 1e-13 * pk.max(1e-300), "{mean} {k}");
            }
        }
    }

    #[test]
    fn sf_and_cdf_complement() {
        for &mean in &[0.3, 2.0, 7.5, 30.0] {
            for k in 0..80u64 {
                let s = ln_poisson_sf(k + 1, mean).exp();
                let c = ln_poisson_cdf(k, mean).exp();
                assert!((s + c - 1.0).abs() < 1e-13, "{mean} {k}");
            }
        }
    }

    #[test]
    fn sf_far_tail_keeps_relative_precision() {
        // P(Y >= 60) for mean 1 is dominated by its first term.
        let ln_sf = ln_poisson_sf(60, 1.0);
        let ln_first = ln_poisson_pmf(60, 1.0);
        assert!(ln_sf > ln_first && ln_sf - ln_first < 0.02);
    }

    #[test]
    fn zero_mean_is_point_mass() {
        assert_eq!(ln_poisson_sf(0, 0.0), 0.0);
        assert_eq!(ln_poisson_sf(1, 0.0), f64::NEG_INFINITY);
        assert_eq!(ln_poisson_cdf(0, 0.0), 0.0);
    }

    #[test]
    fn log_series_sums_exponential_series() {
        // sum_k x^k / k! = e^x
        let x: f64 = 12.0;
        let ln = log_series(x, 0, |k| k as f64 * x.ln() - ln_factorial(k));
        assert!((ln - x).abs() < 1e-13);
    }

    #[test]
    fn log_add_exp_handles_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
