//! Table emitters. Domain errors become per-row markers in the `error` column
//! instead of aborting the table.

use super::{Cell, RunConfig, Table};
use crate::dist::{sample_many, SimParams};
use crate::error::Result;
use crate::rng::Stream;
use crate::tail::{
    build_bound_report, poisson_ge_bound, poisson_ge_exact, tail_exact, PoissonPair, TailQuery,
};
use crate::tree::root_finding_sweep;

fn error_row(width: usize, leading: Vec<Cell>, message: String) -> Vec<Cell> {
    let mut row = leading;
    while row.len() < width - 1 {
        row.push(Cell::Na);
    }
    row.push(Cell::Text(message));
    row
}

pub fn emit_sample_table(config: &RunConfig) -> Result<Table> {
    let mut params = SimParams::new(config.lambda_grid[0], config.seed)?;
    if let Some(b) = config.beta_shape {
        params = params.with_beta_shape(b)?;
    }
    let mut rng = Stream::new(config.seed).derive("sample", 0);
    let samples = sample_many(config.method, &params, config.sample_count, &mut rng)?;
    let mut table = Table::new(&["index", "value", "log_value", "factor_count"]);
    for (i, x) in samples.iter().enumerate() {
        table.push(vec![
            Cell::from(i),
            Cell::Num(x.value),
            Cell::Num(x.log_value),
            Cell::Int(x.factor_count),
        ]);
    }
    Ok(table)
}

/// `t, lambda, exact, log_exact, error` over the grid; `t` outside `(0, 1)`
/// uses the canonical extension.
pub fn emit_exact_table(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new(&["t", "lambda", "exact", "log_exact", "error"]);
    for &lambda in &config.lambda_grid {
        for &t in &config.t_grid {
            let lead = vec![Cell::Num(t), Cell::Num(lambda)];
            match tail_exact(&TailQuery::new(t, lambda)) {
                Ok(p) => table.push(vec![
                    Cell::Num(t),
                    Cell::Num(lambda),
                    Cell::Num(p.p),
                    Cell::Num(p.ln_p),
                    Cell::Text(String::new()),
                ]),
                Err(e) => table.push(error_row(5, lead, e.to_string())),
            }
        }
    }
    Ok(table)
}

pub const TAIL_TABLE_COLUMNS: [&str; 14] = [
    "t",
    "lambda",
    "exact",
    "log_exact",
    "bound_optimal",
    "log_bound_optimal",
    "bound_moment_best_alpha",
    "legacy_bound",
    "log_legacy_bound",
    "asymptotic_lower",
    "log_asymptotic_lower",
    "asymptotic_upper",
    "log_asymptotic_upper",
    "error",
];

/// One full bound report per `(t, lambda)`, lambda-major.
pub fn emit_tail_table(config: &RunConfig) -> Result<Table> {
    let mut table = Table::new(&TAIL_TABLE_COLUMNS);
    for &lambda in &config.lambda_grid {
        for &t in &config.t_grid {
            let lead = vec![Cell::Num(t), Cell::Num(lambda)];
            match build_bound_report(&TailQuery::new(t, lambda)) {
                Ok(r) => table.push(vec![
                    Cell::Num(r.t),
                    Cell::Num(r.lambda),
                    Cell::Num(r.exact),
                    Cell::Num(r.log_exact),
                    Cell::Num(r.bound_optimal),
                    Cell::Num(r.log_bound_optimal),
                    Cell::Num(r.bound_moment_best_alpha),
                    Cell::Num(r.legacy_bound),
                    Cell::Num(r.log_legacy_bound),
                    Cell::Num(r.asymptotic_lower),
                    Cell::Num(r.log_asymptotic_lower),
                    Cell::Num(r.asymptotic_upper),
                    Cell::Num(r.log_asymptotic_upper),
                    Cell::Text(String::new()),
                ]),
                Err(e) => table.push(error_row(TAIL_TABLE_COLUMNS.len(), lead, e.to_string())),
            }
        }
    }
    Ok(table)
}

pub fn emit_poisson_table(config: &RunConfig) -> Result<Table> {
    let columns = [
        "mu", "nu", "ge_exact", "log_ge_exact", "gt_exact", "log_gt_exact", "ge_bound",
        "log_ge_bound", "error",
    ];
    let mut table = Table::new(&columns);
    for &mu in &config.mu_grid {
        for &nu in &config.nu_grid {
            let pair = PoissonPair::new(mu, nu);
            let lead = vec![Cell::Num(mu), Cell::Num(nu)];
            let row = (|| -> Result<Vec<Cell>> {
                let ge = poisson_ge_exact(&pair, false)?;
                let gt = poisson_ge_exact(&pair, true)?;
                let bound = poisson_ge_bound(&pair)?;
                Ok(vec![
                    Cell::Num(mu),
                    Cell::Num(nu),
                    Cell::Num(ge.p),
                    Cell::Num(ge.ln_p),
                    Cell::Num(gt.p),
                    Cell::Num(gt.ln_p),
                    Cell::Num(bound.p),
                    Cell::Num(bound.ln_p),
                    Cell::Text(String::new()),
                ])
            })();
            match row {
                Ok(r) => table.push(r),
                Err(e) => table.push(error_row(columns.len(), lead, e.to_string())),
            }
        }
    }
    Ok(table)
}

/// Root-finding success per `(n, K)`. All `K` for one `n` share the same
/// trees, drawn from the substream `("tree", n)` of the master seed.
pub fn emit_tree_experiment(config: &RunConfig) -> Result<Table> {
    let columns = [
        "n", "k", "trials", "successes", "success_rate", "std_error", "seed", "error",
    ];
    let mut table = Table::new(&columns);
    let master = Stream::new(config.seed);
    for &n in &config.n_grid {
        let stream = master.derive("tree", n as u64);
        let valid: Vec<usize> = config.k_grid.iter().copied().filter(|&k| k >= 1 && k <= n).collect();
        let records = if valid.is_empty() {
            Vec::new()
        } else {
            root_finding_sweep(n, &valid, config.trials, &stream)?
        };
        for &k in &config.k_grid {
            match records.iter().find(|r| r.k == k) {
                Some(r) => table.push(vec![
                    Cell::from(n),
                    Cell::from(k),
                    Cell::from(r.trials),
                    Cell::from(r.successes),
                    Cell::Num(r.success_rate),
                    r.std_error.map_or(Cell::Na, Cell::Num),
                    Cell::Int(config.seed),
                    Cell::Text(String::new()),
                ]),
                None => table.push(error_row(
                    columns.len(),
                    vec![Cell::from(n), Cell::from(k)],
                    format!("invalid parameter: K must lie in 1..={n}, got {k}"),
                )),
            }
        }
    }
    Ok(table)
}
