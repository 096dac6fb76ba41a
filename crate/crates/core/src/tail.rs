//! Lower-tail probability `P(X <= t)` and the bounds that surround it.
//!
//! The exact value rests on the identity `P(X <= t) = P(N > N*)` with
//! independent `N ~ Pois(lambda)` and `N* ~ Pois(-ln t)`. Two summation routes
//! are kept apart on purpose: [`tail_exact`] conditions on `N` (the compound
//! view: `N` uniforms whose log-product falls below `ln t`), while
//! [`poisson_ge_exact`] conditions on the second Poisson variable. Agreement
//! between the two is one of the standing checks.
//!
//! Every evaluator returns a [`LogProb`]; its `ln_p` stays meaningful after
//! `p` underflows.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::special::{
    ln_poisson_cdf, ln_poisson_pmf, ln_poisson_sf, log_add_exp, log_series,
};

/// A nonnegative quantity together with its natural log.
///
/// Bounds may exceed 1; callers clamp for display with [`LogProb::clamped`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogProb {
    pub p: f64,
    pub ln_p: f64,
}

impl LogProb {
    pub const ZERO: LogProb = LogProb {
        p: 0.0,
        ln_p: f64::NEG_INFINITY,
    };
    pub const ONE: LogProb = LogProb { p: 1.0, ln_p: 0.0 };

    pub fn from_ln(ln_p: f64) -> Self {
        Self { p: ln_p.exp(), ln_p }
    }

    pub fn clamped(self) -> Self {
        if self.ln_p > 0.0 {
            Self::ONE
        } else {
            self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub t: f64,
    pub lambda: f64,
    pub alpha: Option<f64>,
}

impl TailQuery {
    pub fn new(t: f64, lambda: f64) -> Self {
        Self {
            t,
            lambda,
            alpha: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    fn rate(&self) -> Result<f64> {
        if self.lambda.is_finite() && self.lambda > 0.0 {
            Ok(self.lambda)
        } else {
            Err(invalid(format!("lambda must be positive and finite, got {}", self.lambda)))
        }
    }

    /// `-ln t`, requiring `0 < t < 1`.
    fn log_depth(&self) -> Result<f64> {
        if self.t > 0.0 && self.t < 1.0 {
            Ok(-self.t.ln())
        } else {
            Err(invalid(format!("t must lie in (0, 1), got {}", self.t)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonPair {
    pub mu: f64,
    pub nu: f64,
}

impl PoissonPair {
    pub fn new(mu: f64, nu: f64) -> Self {
        Self { mu, nu }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("nu", self.nu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be nonnegative and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonTailQuery {
    pub n: u64,
    pub mu: f64,
}

/// Exact `P(X <= t)`.
///
/// Outside `(0, 1)` the value is canonical: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn tail_exact(q: &TailQuery) -> Result<LogProb> {
    let lambda = q.rate()?;
    if q.t.is_nan() {
        return Err(invalid("t is NaN"));
    }
    if q.t <= 0.0 {
        return Ok(LogProb::ZERO);
    }
    if q.t >= 1.0 {
        return Ok(LogProb::ONE);
    }
    let depth = -q.t.ln();
    // Given N = n >= 1, the product of n uniforms is <= t exactly when a
    // Pois(depth) count is at most n - 1.
    let ln_p = log_series(lambda, 1, |n| {
        ln_poisson_pmf(n, lambda) + ln_poisson_cdf(n - 1, depth)
    });
    Ok(LogProb::from_ln(ln_p.min(0.0)))
}

/// `P(M_mu >= M_nu)`, or `P(M_mu > M_nu)` when `strict`.
pub fn poisson_ge_exact(pair: &PoissonPair, strict: bool) -> Result<LogProb> {
    pair.validate()?;
    let shift = u64::from(strict);
    let ln_p = log_series(pair.nu, 0, |k| {
        ln_poisson_pmf(k, pair.nu) + ln_poisson_sf(k + shift, pair.mu)
    });
    Ok(LogProb::from_ln(ln_p.min(0.0)))
}

/// `P(M_mu = M_nu)`.
pub fn poisson_eq_exact(pair: &PoissonPair) -> Result<LogProb> {
    pair.validate()?;
    let ln_p = log_series(pair.nu, 0, |k| {
        ln_poisson_pmf(k, pair.nu) + ln_poisson_pmf(k, pair.mu)
    });
    Ok(LogProb::from_ln(ln_p.min(0.0)))
}

/// `exp(-(sqrt(nu) - sqrt(mu))_+^2)`, an upper bound on `P(M_mu >= M_nu)`.
pub fn poisson_ge_bound(pair: &PoissonPair) -> Result<LogProb> {
    pair.validate()?;
    let gap = (pair.nu.sqrt() - pair.mu.sqrt()).max(0.0);
    Ok(LogProb::from_ln(-gap * gap))
}

/// Markov bound through the moment of order `-alpha`:
/// `exp(alpha lambda / (1 - alpha)) t^alpha`. Not clamped.
pub fn tail_bound_moment(q: &TailQuery) -> Result<LogProb> {
    let lambda = q.rate()?;
    let alpha = q
        .alpha
        .ok_or_else(|| invalid("moment bound requires alpha"))?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(q.t.is_finite() && q.t > 0.0) {
        return Err(invalid(format!("t must be positive, got {}", q.t)));
    }
    Ok(LogProb::from_ln(alpha * lambda / (1.0 - alpha) + alpha * q.t.ln()))
}

/// Exponent minimizing the moment bound, `(1 - sqrt(lambda / -ln t))_+`.
pub fn optimal_alpha(q: &TailQuery) -> Result<f64> {
    let depth = q.log_depth()?;
    let lambda = q.rate()?;
    Ok((1.0 - (lambda / depth).sqrt()).max(0.0))
}

/// The moment bound at its optimal exponent: `exp(-(sqrt(-ln t) - sqrt(lambda))_+^2)`.
pub fn tail_bound_optimal(q: &TailQuery) -> Result<LogProb> {
    let depth = q.log_depth()?;
    let lambda = q.rate()?;
    let gap = (depth.sqrt() - lambda.sqrt()).max(0.0);
    Ok(LogProb::from_ln(-gap * gap))
}

/// The older `6 t^(1/4)` bound for `lambda = 1`; nontrivial only below `(1/6)^4`.
pub fn tail_bound_legacy(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok(6.0 * t.powf(0.25))
}

/// Closed-form lower bound on `P(X <= t)`, valid for every `t` in `(0, 1)`:
///
/// `t e^-lambda ( (e^{2s}/2 - 1 - 2 s^2) / (4 sqrt(2 pi) (-ln t)) + lambda )`
/// with `s = sqrt(-lambda ln t)`. When the bracket is not positive (only
/// possible for `t` near 1) the bound is reported as 0.
pub fn asymptotic_lower(q: &TailQuery) -> Result<LogProb> {
    let depth = q.log_depth()?;
    let lambda = q.rate()?;
    let s = (lambda * depth).sqrt();
    let ln_scale = (4.0 * (2.0 * std::f64::consts::PI).sqrt() * depth).ln();
    let ln_bracket = if s < 16.0 {
        let inner = (2.0 * s).exp() / 2.0 - 1.0 - 2.0 * s * s;
        let bracket = inner / (4.0 * (2.0 * std::f64::consts::PI).sqrt() * depth) + lambda;
        if bracket <= 0.0 {
            return Ok(LogProb::ZERO);
        }
        bracket.ln()
    } else {
        // e^{2s} never leaves the log domain here.
        let ln_inner = 2.0 * s - std::f64::consts::LN_2
            + (-2.0 * (-2.0 * s).exp() * (1.0 + 2.0 * s * s)).ln_1p();
        log_add_exp(ln_inner - ln_scale, lambda.ln())
    };
    Ok(LogProb::from_ln(-depth - lambda + ln_bracket))
}

/// Closed-form upper bound on `P(X <= t)`, valid for every `t` in `(0, 1)`.
///
/// For `lambda < 2`:
/// `t e^-lambda / (1 - lambda/2) ( sqrt(lambda / (-pi ln t)) e^{2s} + lambda )`.
/// For `lambda >= 2` the sum over the second Poisson count is split at
/// `floor(lambda)`: the head bounds `P(N >= k+1)` by 1, the tail uses the
/// geometric Poisson tail bound, and the tail series is summed numerically.
/// Not clamped; may exceed 1 for `t` near 1.
pub fn asymptotic_upper(q: &TailQuery) -> Result<LogProb> {
    let depth = q.log_depth()?;
    let lambda = q.rate()?;
    let ln_depth = depth.ln();
    if lambda < 2.0 {
        let s = (lambda * depth).sqrt();
        let ln_lead = 0.5 * (lambda / (std::f64::consts::PI * depth)).ln() + 2.0 * s;
        let ln_bracket = log_add_exp(ln_lead, lambda.ln());
        return Ok(LogProb::from_ln(
            -depth - lambda - (1.0 - lambda / 2.0).ln() + ln_bracket,
        ));
    }
    let head_len = lambda.floor() as u64;
    let mut ln_head = f64::NEG_INFINITY;
    for k in 0..=head_len {
        ln_head = log_add_exp(ln_head, k as f64 * ln_depth - ln_factorial(k));
    }
    let ln_tail = log_series(depth, head_len + 1, |k| {
        let kf = k as f64;
        kf * ln_depth - ln_factorial(k) + ln_poisson_pmf(k + 1, lambda)
            - (1.0 - lambda / (kf + 2.0)).ln()
    });
    Ok(LogProb::from_ln(-depth + log_add_exp(ln_head, ln_tail)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonTailBounds {
    pub lower: f64,
    pub ln_lower: f64,
    /// Present only when `mu < n + 1`.
    pub upper: Option<f64>,
    pub ln_upper: Option<f64>,
}

/// `pmf(n) <= P(Y >= n) <= pmf(n) / (1 - mu/(n+1))` for `Y ~ Pois(mu)`.
pub fn poisson_tail_bounds(q: &PoissonTailQuery) -> Result<PoissonTailBounds> {
    if !(q.mu >= 0.0 && q.mu.is_finite()) {
        return Err(invalid(format!("mu must be nonnegative and finite, got {}", q.mu)));
    }
    let ln_lower = ln_poisson_pmf(q.n, q.mu);
    let ratio = q.mu / (q.n as f64 + 1.0);
    let ln_upper = (ratio < 1.0).then(|| ln_lower - (1.0 - ratio).ln());
    Ok(PoissonTailBounds {
        lower: ln_lower.exp(),
        ln_lower,
        upper: ln_upper.map(f64::exp),
        ln_upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirlingBounds {
    pub lower: f64,
    pub upper: f64,
    pub exact: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
    pub ln_exact: f64,
}

/// Brackets `1 / (n! (n+1)!)` between `4^n / (sqrt(2 pi n) (2n+1)!)` and
/// `2 sqrt 2` times that.
pub fn stirling_ratio_bounds(n: u64) -> Result<StirlingBounds> {
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    let nf = n as f64;
    let ln_exact = -ln_gamma(nf + 1.0) - ln_gamma(nf + 2.0);
    let ln_lower = 2.0 * nf * std::f64::consts::LN_2
        - 0.5 * (2.0 * std::f64::consts::PI * nf).ln()
        - ln_gamma(2.0 * nf + 2.0);
    let ln_upper = ln_lower + 1.5 * std::f64::consts::LN_2;
    Ok(StirlingBounds {
        lower: ln_lower.exp(),
        upper: ln_upper.exp(),
        exact: ln_exact.exp(),
        ln_lower,
        ln_upper,
        ln_exact,
    })
}

/// Every tail quantity at one `(t, lambda)`. Probabilities are clamped at 1;
/// the `log_` companions are not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub t: f64,
    pub lambda: f64,
    pub exact: f64,
    pub log_exact: f64,
    pub bound_optimal: f64,
    pub log_bound_optimal: f64,
    /// Minimizing exponent of the moment bound; 0 when the bound is vacuous.
    pub bound_moment_best_alpha: f64,
    pub legacy_bound: f64,
    pub log_legacy_bound: f64,
    pub asymptotic_lower: f64,
    pub log_asymptotic_lower: f64,
    pub asymptotic_upper: f64,
    pub log_asymptotic_upper: f64,
}

// Slack for ordering checks in the log domain; the true gaps are far larger.
const ORDER_SLACK: f64 = 1e-9;

pub fn build_bound_report(q: &TailQuery) -> Result<BoundReport> {
    q.log_depth()?;
    q.rate()?;
    let exact = tail_exact(q)?;
    let optimal = tail_bound_optimal(q)?;
    let alpha = optimal_alpha(q)?;
    let legacy = tail_bound_legacy(q.t)?;
    let lower = asymptotic_lower(q)?;
    let upper = asymptotic_upper(q)?;

    let ordered = |lo: f64, hi: f64, what: &str| -> Result<()> {
        if lo <= hi + ORDER_SLACK {
            Ok(())
        } else {
            Err(Error::Inconsistency(format!(
                "{what} violated at t={}, lambda={}: ln {lo} > ln {hi}",
                q.t, q.lambda
            )))
        }
    };
    ordered(lower.ln_p, exact.ln_p, "asymptotic_lower <= exact")?;
    ordered(exact.ln_p, upper.ln_p, "exact <= asymptotic_upper")?;
    ordered(exact.ln_p, optimal.ln_p, "exact <= bound_optimal")?;

    let upper_c = upper.clamped();
    Ok(BoundReport {
        t: q.t,
        lambda: q.lambda,
        exact: exact.p,
        log_exact: exact.ln_p,
        bound_optimal: optimal.clamped().p,
        log_bound_optimal: optimal.ln_p,
        bound_moment_best_alpha: alpha,
        legacy_bound: legacy,
        log_legacy_bound: legacy.ln(),
        asymptotic_lower: lower.clamped().p,
        log_asymptotic_lower: lower.ln_p,
        asymptotic_upper: upper_c.p,
        log_asymptotic_upper: upper.ln_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn moment_bound_spot_values() {
        let q = TailQuery::new((-4.0f64).exp(), 1.0).with_alpha(0.5);
        assert!(close(tail_bound_moment(&q).unwrap().p, (-1.0f64).exp(), 1e-12));
        let q = TailQuery::new(1e-4, 1.0).with_alpha(0.25);
        assert!(close(tail_bound_moment(&q).unwrap().p, 0.13956124250861, 1e-11));
    }

    #[test]
    fn moment_bound_rejects_bad_alpha() {
        let q = TailQuery::new(0.1, 1.0);
        assert!(tail_bound_moment(&q).is_err());
        for a in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(tail_bound_moment(&q.with_alpha(a)).is_err(), "alpha {a}");
        }
    }

    #[test]
    fn optimal_alpha_spot_values() {
        let a = optimal_alpha(&TailQuery::new((-4.0f64).exp(), 1.0)).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        let a = optimal_alpha(&TailQuery::new((-9.0f64).exp(), 1.0)).unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(optimal_alpha(&TailQuery::new(0.5, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn optimal_bound_is_one_when_vacuous() {
        let b = tail_bound_optimal(&TailQuery::new(0.5, 1.0)).unwrap();
        assert_eq!(b.p, 1.0);
        assert_eq!(b.ln_p, 0.0);
    }

    #[test]
    fn legacy_spot_values() {
        assert!(close(tail_bound_legacy(1.0 / 1296.0).unwrap(), 1.0, 1e-12));
        assert!(close(tail_bound_legacy(1e-4).unwrap(), 0.6, 1e-12));
        assert_eq!(tail_bound_legacy(1.0).unwrap(), 6.0);
        assert!(tail_bound_legacy(-1.0).is_err());
    }

    #[test]
    fn exact_edges() {
        assert_eq!(tail_exact(&TailQuery::new(0.0, 1.0)).unwrap().p, 0.0);
        assert_eq!(tail_exact(&TailQuery::new(1.0, 1.0)).unwrap().p, 1.0);
        let near = tail_exact(&TailQuery::new(1.0 - 1e-12, 2.0)).unwrap().p;
        assert!(close(near, 1.0 - (-2.0f64).exp(), 1e-9));
        let small = tail_exact(&TailQuery::new(0.3, 1e-9)).unwrap().p;
        assert!(small < 2e-9);
        assert!(tail_exact(&TailQuery::new(0.3, 0.0)).is_err());
    }

    #[test]
    fn exact_in_log_domain_far_tail() {
        let e = tail_exact(&TailQuery::new(1e-300, 1.0)).unwrap();
        assert!(e.ln_p.is_finite() && e.ln_p < -500.0);
        let b = tail_bound_optimal(&TailQuery::new(1e-300, 1.0)).unwrap();
        assert!(e.ln_p <= b.ln_p);
    }

    #[test]
    fn exact_reference_values() {
        let e = tail_exact(&TailQuery::new(0.01, 1.0)).unwrap().p;
        assert!(close(e, 0.0308961353514575, 1e-12));
        let e = tail_exact(&TailQuery::new(1e-6, 3.0)).unwrap().p;
        assert!(close(e, 1.614648e-3, 1e-6));
    }

    #[test]
    fn poisson_comparison_spot_values() {
        assert_eq!(poisson_ge_exact(&PoissonPair::new(3.0, 0.0), false).unwrap().p, 1.0);
        let p = poisson_ge_exact(&PoissonPair::new(0.0, 2.5), false).unwrap().p;
        assert!(close(p, (-2.5f64).exp(), 1e-13));
        let p = poisson_ge_exact(&PoissonPair::new(1.0, 1.0), false).unwrap().p;
        assert!(close(p, 0.65425416127684, 1e-12));
        let eq = poisson_eq_exact(&PoissonPair::new(1.0, 1.0)).unwrap().p;
        assert!(close(eq, 0.30850832255367, 1e-12));
        let b = poisson_ge_bound(&PoissonPair::new(1.0, 9.0)).unwrap().p;
        assert!(close(b, (-4.0f64).exp(), 1e-12));
        assert_eq!(poisson_ge_bound(&PoissonPair::new(4.0, 1.0)).unwrap().p, 1.0);
        assert!(poisson_ge_exact(&PoissonPair::new(-1.0, 1.0), false).is_err());
    }

    #[test]
    fn sandwich_spot_values() {
        let q = TailQuery::new(1e-6, 1.0);
        assert!(close(asymptotic_lower(&q).unwrap().p, 2.539014017e-6, 1e-8));
        assert!(close(asymptotic_upper(&q).unwrap().p, 1.8973266744e-4, 1e-8));
        let q = TailQuery::new(1e-6, 3.0);
        assert!(asymptotic_upper(&q).unwrap().p >= 1.614648e-3);
    }

    #[test]
    fn lower_is_zero_near_one() {
        let l = asymptotic_lower(&TailQuery::new(0.99, 0.5)).unwrap();
        assert_eq!(l.p, 0.0);
        assert_eq!(l.ln_p, f64::NEG_INFINITY);
    }

    #[test]
    fn poisson_tail_bound_spot_values() {
        let b = poisson_tail_bounds(&PoissonTailQuery { n: 0, mu: 0.5 }).unwrap();
        assert!(close(b.lower, (-0.5f64).exp(), 1e-13));
        assert!(close(b.upper.unwrap(), 2.0 * (-0.5f64).exp(), 1e-13));
        let b = poisson_tail_bounds(&PoissonTailQuery { n: 2, mu: 1.0 }).unwrap();
        assert!(close(b.lower, 0.18393972058572, 1e-12));
        assert!(b.lower <= 0.26424111765712 && 0.26424111765712 <= b.upper.unwrap());
        assert!(close(b.upper.unwrap(), 0.27590958087858, 1e-12));
        let b = poisson_tail_bounds(&PoissonTailQuery { n: 1, mu: 2.0 }).unwrap();
        assert!(b.upper.is_none());
    }

    #[test]
    fn stirling_spot_values() {
        let s = stirling_ratio_bounds(1).unwrap();
        assert!(close(s.exact, 0.5, 1e-14));
        assert!(close(s.lower, 0.26596152026762, 1e-12));
        let s = stirling_ratio_bounds(2).unwrap();
        assert!(close(s.exact, 1.0 / 12.0, 1e-14));
        assert!(close(s.lower, 0.037612638903184, 1e-12));
        assert!(stirling_ratio_bounds(0).is_err());
    }

    #[test]
    fn report_rejects_out_of_domain() {
        assert!(build_bound_report(&TailQuery::new(1.0, 1.0)).is_err());
        assert!(build_bound_report(&TailQuery::new(0.1, -1.0)).is_err());
        let r = build_bound_report(&TailQuery::new(0.5, 1.0)).unwrap();
        assert_eq!(r.bound_optimal, 1.0);
        assert!(r.exact <= r.asymptotic_upper);
    }
}
