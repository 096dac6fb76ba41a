use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prodtail::dist::Method;
use prodtail::harness::{self, exit, CommandKind, OutputFormat, RunConfig, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "prodtail", version, about = "Lower tails of capped exponential products and subtree-product root finding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: OutputFormat,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples of X.
    Sample {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value = "direct", value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        beta_shape: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact lower-tail probabilities over a (t, lambda) grid.
    Tail {
        #[command(flatten)]
        grid: TailGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Full bound report over a (t, lambda) grid.
    Bounds {
        #[command(flatten)]
        grid: TailGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Comparison probabilities for two independent Poisson counts.
    Poisson {
        /// Defaults to 0, 0.5, 1, 2, 5, 10.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        mu: Vec<f64>,
        /// Defaults to 0, 0.5, 1, 2, 5, 10.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        nu: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Root-finding success rates on uniform attachment trees.
    Tree {
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification suite; exits 1 if any check fails.
    Verify {
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Force the thresholds of a check family (or `all`) to zero.
        #[arg(long)]
        zero_tolerance: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct TailGrid {
    /// Thresholds; defaults to 1e-1, 1e-2, ..., 1e-12.
    #[arg(long = "t", value_delimiter = ',', num_args = 1..)]
    t: Vec<f64>,
    /// Rates; defaults to 0.5, 1, 2, 3, 5.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    lambda: Vec<f64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: prodtail::Error| e.to_string())
}

fn config_from(cli: Cli) -> RunConfig {
    let (kind, common) = match &cli.command {
        Command::Sample { common, .. } => (CommandKind::Sample, common),
        Command::Tail { common, .. } => (CommandKind::Tail, common),
        Command::Bounds { common, .. } => (CommandKind::Bounds, common),
        Command::Poisson { common, .. } => (CommandKind::Poisson, common),
        Command::Tree { common, .. } => (CommandKind::Tree, common),
        Command::Verify { common, .. } => (CommandKind::Verify, common),
    };
    let mut cfg = RunConfig::new(kind);
    cfg.seed = common.seed;
    cfg.output_format = common.format;
    cfg.output_path = common.out.clone();
    match cli.command {
        Command::Sample { lambda, count, method, beta_shape, .. } => {
            cfg.lambda_grid = vec![lambda];
            cfg.sample_count = count;
            cfg.method = method;
            cfg.beta_shape = beta_shape;
        }
        Command::Tail { grid, .. } | Command::Bounds { grid, .. } => {
            if !grid.t.is_empty() {
                cfg.t_grid = grid.t;
            }
            if !grid.lambda.is_empty() {
                cfg.lambda_grid = grid.lambda;
            }
        }
        Command::Poisson { mu, nu, .. } => {
            if !mu.is_empty() {
                cfg.mu_grid = mu;
            }
            if !nu.is_empty() {
                cfg.nu_grid = nu;
            }
        }
        Command::Tree { n, k, trials, .. } => {
            cfg.n_grid = n;
            cfg.k_grid = k;
            cfg.trials = trials;
        }
        Command::Verify { report, zero_tolerance, .. } => {
            cfg.report_path = report.or(cfg.output_path.clone());
            cfg.zero_tolerance = zero_tolerance;
        }
    }
    cfg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = config_from(cli);
    let code = match harness::run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            harness::exit_code_for(&e)
        }
    };
    debug_assert!(code <= exit::IO);
    ExitCode::from(code as u8)
}
