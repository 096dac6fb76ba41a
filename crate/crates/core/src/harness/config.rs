use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dist::Method;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Sample,
    Tail,
    Bounds,
    Poisson,
    Tree,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    pub nu_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub sample_count: usize,
    pub method: Method,
    pub beta_shape: Option<f64>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    /// Verification families whose thresholds are forced to zero.
    pub zero_tolerance: Vec<String>,
}

impl RunConfig {
    /// Defaults for `command`: t in 10^-1..10^-12, lambda in {0.5, 1, 2, 3, 5},
    /// mu and nu in {0, 0.5, 1, 2, 5, 10}, trees of 1000 vertices with
    /// K in {1, 5, 25, 50} over 200 trials.
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            seed: DEFAULT_SEED,
            t_grid: (1..=12).map(|e| 10f64.powi(-e)).collect(),
            lambda_grid: vec![0.5, 1.0, 2.0, 3.0, 5.0],
            mu_grid: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0],
            nu_grid: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0],
            n_grid: vec![1000],
            k_grid: vec![1, 5, 25, 50],
            trials: 200,
            sample_count: 1000,
            method: Method::Direct,
            beta_shape: None,
            output_format: OutputFormat::Csv,
            output_path: None,
            report_path: None,
            zero_tolerance: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(what.to_string()))
            }
        };
        match self.command {
            CommandKind::Sample => {
                need(self.lambda_grid.len() == 1, "sample takes exactly one --lambda")?;
                need(self.sample_count >= 1, "--count must be at least 1")?;
                if self.method == Method::Beta {
                    need(self.beta_shape.is_some(), "--method beta needs --beta-shape")?;
                }
            }
            CommandKind::Tail | CommandKind::Bounds => {
                need(!self.t_grid.is_empty(), "--t grid is empty")?;
                need(!self.lambda_grid.is_empty(), "--lambda grid is empty")?;
            }
            CommandKind::Poisson => {
                need(!self.mu_grid.is_empty(), "--mu grid is empty")?;
                need(!self.nu_grid.is_empty(), "--nu grid is empty")?;
            }
            CommandKind::Tree => {
                need(!self.n_grid.is_empty(), "--n grid is empty")?;
                need(!self.k_grid.is_empty(), "--k grid is empty")?;
                need(self.trials >= 1, "--trials must be at least 1")?;
            }
            CommandKind::Verify => {}
        }
        Ok(())
    }
}
