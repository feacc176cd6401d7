//! Command implementations behind the `robin-rd` binary.
//!
//! Each command takes a [`Session`] and returns its report together with a
//! [`Status`]; the binary maps the status to the process exit code.

pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use robin_rd::grid::{compute_a1, Grid1D};
use robin_rd::nonlinearity::{C1Interpretation, QuadSpec, ReactionQuad, INTERVAL_RADIUS};
use serde::Serialize;

pub use config::RunConfig;

/// Outcome class of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    ChecksFailed,
    NoCertifiedWitness,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::ChecksFailed => 1,
            Status::NoCertifiedWitness => 2,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Success
        } else {
            Status::ChecksFailed
        }
    }
}

/// Everything a command needs: config, grid, quadruple, output directory.
pub struct Session {
    pub config: RunConfig,
    pub grid: Grid1D,
    pub quad_spec: QuadSpec,
    pub quad: ReactionQuad,
    pub out: PathBuf,
    pub oracle: bool,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub oracle: bool,
    pub c1: Option<f64>,
}

impl Session {
    pub fn new(mut config: RunConfig, overrides: Overrides) -> Result<Self> {
        if let Some(n) = overrides.grid {
            config.grid = n;
        }
        if let Some(c1) = overrides.c1 {
            config.c1_interpretation = C1Interpretation::Fixed(c1);
        }
        config.validate()?;
        let out = overrides
            .out
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let quad_spec = config.quad_spec()?;
        let quad = quad_spec
            .build()
            .context("building the reaction quadruple")?;
        quad.check_normalization()
            .context("checking the order of f and g")?;
        Ok(Self {
            grid: Grid1D::new(config.grid)?,
            config,
            quad_spec,
            quad,
            out,
            oracle: overrides.oracle,
        })
    }

    pub fn a1(&self) -> Result<f64> {
        Ok(compute_a1(self.grid, self.quad.g.deriv0())?)
    }

    pub fn c1(&self) -> f64 {
        self.config.c1_interpretation.value(1, INTERVAL_RADIUS)
    }

    /// Creates the output directory and returns the path of `name` in it.
    pub fn output(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    pub fn write_report<T: Serialize>(&self, report: &T) -> Result<PathBuf> {
        let path = self.output("report.json")?;
        write_json(report, &path)?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    robin_rd::io::save_json(value, path).with_context(|| format!("writing {}", path.display()))
}

/// `solution_<λ>_<μ>_<tag>.csv`
pub fn solution_file_name(lambda: f64, mu: f64, tag: &str) -> String {
    format!("solution_{lambda}_{mu}_{tag}.csv")
}
