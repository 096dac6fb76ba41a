//! Brute-force references that share no numerics with [`crate::tail`]:
//! plain factorial recurrences in `f64`, fixed truncation, no log-gamma.
//! Only suitable for moderate parameters.

/// Poisson pmf values `P(Y = 0..=upto)` by the ratio recurrence.
pub fn poisson_pmfs(mean: f64, upto: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(upto + 1);
    p.push((-mean).exp());
    for j in 1..=upto {
        let prev = p[j - 1];
        p.push(prev * mean / j as f64);
    }
    p
}

/// `P(Y >= n)` by summing the pmf forward from `n` for `extra` terms.
pub fn poisson_upper_tail(n: usize, mean: f64, extra: usize) -> f64 {
    poisson_pmfs(mean, n + extra)[n..].iter().sum()
}

/// `sum_{k <= k_max} P(N* = k) P(N >= k + 1)` with `N* ~ Pois(-ln t)`,
/// `N ~ Pois(lambda)`, the upper tail taken as one minus the lower sum.
pub fn tail_double_sum(t: f64, lambda: f64, k_max: usize) -> f64 {
    let weights = poisson_pmfs(-t.ln(), k_max);
    let inner = poisson_pmfs(lambda, k_max + 1);
    let mut lower = 0.0;
    let mut total = 0.0;
    for (k, w) in weights.iter().enumerate() {
        lower += inner[k];
        total += w * (1.0 - lower);
    }
    total
}

/// `P(M_mu >= M_nu)` (or `>` when `strict`) by a fixed double loop.
pub fn poisson_ge_double_sum(mu: f64, nu: f64, strict: bool, k_max: usize) -> f64 {
    let a = poisson_pmfs(mu, k_max);
    let b = poisson_pmfs(nu, k_max);
    let mut total = 0.0;
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            if i > j || (!strict && i == j) {
                total += pa * pb;
            }
        }
    }
    total
}

/// `1 / (n! (n+1)!)` by repeated division.
pub fn inverse_factorial_pair(n: usize) -> f64 {
    let mut x = 1.0;
    for j in 1..=n {
        x /= j as f64;
    }
    x / (1..=n + 1).map(|j| j as f64).product::<f64>()
}
