//! Samplers for `X = prod_i min(S_i, 1)`, where `S_i` are partial sums of
//! iid `Exp(lambda)` draws, and its closed-form moments.
//!
//! Three constructions are provided and are equal in distribution:
//!
//! * direct: accumulate exponential partial sums until one reaches 1;
//! * compound: draw `N ~ Pois(lambda)` and multiply `N` standard uniforms;
//! * beta: partial sums of `-ln B_k` with `B_k ~ Beta(beta, 1)`, which is the
//!   direct construction with `lambda = beta`.
//!
//! Products are carried as sums of logarithms; `value` is `exp(log_value)`.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub lambda: f64,
    pub beta_shape: Option<f64>,
    pub rng_seed: u64,
}

impl SimParams {
    pub fn new(lambda: f64, rng_seed: u64) -> Result<Self> {
        let params = Self {
            lambda,
            beta_shape: None,
            rng_seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_beta_shape(mut self, beta_shape: f64) -> Result<Self> {
        self.beta_shape = Some(beta_shape);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate(self.lambda)?;
        if let Some(b) = self.beta_shape {
            check_beta_shape(b)?;
        }
        Ok(())
    }

    pub fn stream(&self) -> Stream {
        Stream::new(self.rng_seed)
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be positive and finite, got {lambda}")))
    }
}

fn check_beta_shape(b: f64) -> Result<()> {
    if b > 0.0 && b <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("beta_shape must lie in (0, 1], got {b}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XSample {
    pub value: f64,
    pub log_value: f64,
    /// Number of factors below 1 (partial sums `< 1`, or `N` in the compound view).
    pub factor_count: u64,
}

impl XSample {
    fn from_log(log_value: f64, factor_count: u64) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
            factor_count,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Compound,
    Beta,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "compound" => Ok(Method::Compound),
            "beta" => Ok(Method::Beta),
            other => Err(invalid(format!("unknown sampling method {other:?}"))),
        }
    }
}

/// Applies the partial-sum rule to a sequence of increments.
///
/// Multiplies every partial sum that is still below 1 and stops at the first
/// one that reaches 1. Fails if the sequence ends before that happens.
pub fn x_from_increments(increments: impl IntoIterator<Item = f64>) -> Result<XSample> {
    let mut partial = 0.0;
    let mut log_value = 0.0;
    for (count, e) in (0u64..).zip(increments) {
        partial += e;
        if partial >= 1.0 {
            return Ok(XSample::from_log(log_value, count));
        }
        log_value += partial.ln();
    }
    Err(invalid("increment sequence ended before its partial sum reached 1"))
}

/// Product of the given uniforms (1 for an empty slice).
pub fn x_from_uniforms(uniforms: &[f64]) -> XSample {
    let log_value = uniforms.iter().map(|u| u.ln()).sum();
    XSample::from_log(log_value, uniforms.len() as u64)
}

pub fn sample_x_direct(params: &SimParams, rng: &mut Stream) -> Result<XSample> {
    check_rate(params.lambda)?;
    let lambda = params.lambda;
    x_from_increments(std::iter::repeat_with(|| rng.exponential(lambda)))
}

pub fn sample_x_compound(params: &SimParams, rng: &mut Stream) -> Result<XSample> {
    check_rate(params.lambda)?;
    let poisson = Poisson::new(params.lambda).map_err(|e| invalid(e.to_string()))?;
    let n = poisson.sample(rng) as u64;
    let mut log_value = 0.0;
    for _ in 0..n {
        log_value += rng.open_unit().ln();
    }
    Ok(XSample::from_log(log_value, n))
}

pub fn sample_x_beta(params: &SimParams, rng: &mut Stream) -> Result<XSample> {
    let shape = params
        .beta_shape
        .ok_or_else(|| invalid("beta sampler requires beta_shape"))?;
    check_beta_shape(shape)?;
    let inv = 1.0 / shape;
    x_from_increments(std::iter::repeat_with(|| {
        let b = rng.open_unit().powf(inv);
        -b.ln()
    }))
}

pub fn sample_x(method: Method, params: &SimParams, rng: &mut Stream) -> Result<XSample> {
    match method {
        Method::Direct => sample_x_direct(params, rng),
        Method::Compound => sample_x_compound(params, rng),
        Method::Beta => sample_x_beta(params, rng),
    }
}

/// Draws `count` samples from a single stream.
pub fn sample_many(
    method: Method,
    params: &SimParams,
    count: usize,
    rng: &mut Stream,
) -> Result<Vec<XSample>> {
    params.validate()?;
    (0..count).map(|_| sample_x(method, params, rng)).collect()
}

/// `E[X^order] = exp(-order * lambda / (1 + order))`, defined for `order > -1`.
pub fn moment_exact(order: f64, lambda: f64) -> Result<f64> {
    if !(order.is_finite() && order > -1.0) {
        return Err(invalid(format!("moment order must exceed -1, got {order}")));
    }
    check_rate(lambda)?;
    Ok((-order * lambda / (1.0 + order)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_increment_past_one_gives_empty_product() {
        let x = x_from_increments([1.3, 0.1]).unwrap();
        assert_eq!(x.value, 1.0);
        assert_eq!(x.log_value, 0.0);
        assert_eq!(x.factor_count, 0);
        let x = x_from_increments([1.0]).unwrap();
        assert_eq!(x.factor_count, 0);
    }

    #[test]
    fn hand_traced_partial_sums() {
        // S = 0.5, 0.8, 1.2 -> 0.5 * 0.8
        let x = x_from_increments([0.5, 0.3, 0.4, 9.0]).unwrap();
        assert!((x.value - 0.40).abs() < 1e-15);
        assert_eq!(x.factor_count, 2);
    }

    #[test]
    fn increments_that_never_reach_one_are_rejected() {
        assert!(x_from_increments([0.1, 0.2]).is_err());
    }

    #[test]
    fn uniform_products() {
        assert_eq!(x_from_uniforms(&[]).value, 1.0);
        let x = x_from_uniforms(&[0.5, 0.2]);
        assert!((x.value - 0.10).abs() < 1e-15);
        assert_eq!(x.factor_count, 2);
    }

    #[test]
    fn direct_sampler_draws_exactly_count_plus_one() {
        let params = SimParams::new(2.0, 5).unwrap();
        let mut a = params.stream();
        let mut b = params.stream();
        for _ in 0..1000 {
            let x = sample_x_direct(&params, &mut a).unwrap();
            let mut s = 0.0;
            let mut log = 0.0;
            for _ in 0..x.factor_count {
                s += b.exponential(2.0);
                assert!(s < 1.0);
                log += f64::ln(s);
            }
            s += b.exponential(2.0);
            assert!(s >= 1.0);
            assert_eq!(log, x.log_value);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(SimParams::new(0.0, 1).is_err());
        assert!(SimParams::new(-1.0, 1).is_err());
        assert!(SimParams::new(f64::NAN, 1).is_err());
        let p = SimParams::new(1.0, 1).unwrap();
        assert!(p.with_beta_shape(0.0).is_err());
        assert!(p.with_beta_shape(1.5).is_err());
        assert!(p.with_beta_shape(1.0).is_ok());
        let mut s = Stream::new(0);
        assert!(sample_x_beta(&p, &mut s).is_err());
        let bad = SimParams { lambda: -2.0, beta_shape: None, rng_seed: 0 };
        assert!(sample_x_direct(&bad, &mut s).is_err());
        assert!(sample_x_compound(&bad, &mut s).is_err());
    }

    #[test]
    fn moments_closed_form() {
        assert_eq!(moment_exact(0.0, 1.0).unwrap(), 1.0);
        assert!((moment_exact(1.0, 1.0).unwrap() - 0.606_530_659_712_633).abs() < 1e-12);
        let m2 = moment_exact(2.0, 1.0).unwrap();
        assert!((m2 - 0.513_417_119_032_592).abs() < 1e-12);
        let var = m2 - moment_exact(1.0, 1.0).unwrap().powi(2);
        assert!((var - 0.145_537_677_861_150).abs() < 1e-12);
        assert!(moment_exact(-1.0, 1.0).is_err());
        assert!(moment_exact(0.5, 0.0).is_err());
        // negative orders blow up toward -1
        assert!(moment_exact(-0.99, 1.0).unwrap() > 1e40);
    }

    #[test]
    fn samples_are_in_unit_interval() {
        let params = SimParams::new(3.0, 9).unwrap().with_beta_shape(0.3).unwrap();
        let mut s = params.stream();
        for method in [Method::Direct, Method::Compound, Method::Beta] {
            for x in sample_many(method, &params, 5000, &mut s).unwrap() {
                assert!(x.value > 0.0 && x.value <= 1.0);
                assert!(x.log_value <= 0.0);
                assert_eq!(x.factor_count == 0, x.value == 1.0);
            }
        }
    }
}
