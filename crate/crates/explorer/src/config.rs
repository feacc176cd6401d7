//! Run configuration, read from JSON.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use robin_rd::grid::Grid1D;
use robin_rd::monotone::IterationOptions;
use robin_rd::nonlinearity::{C1Interpretation, QuadSpec};
use robin_rd::shooting::ShootingOptions;
use robin_rd::subsuper::SuperCase;
use serde::{Deserialize, Serialize};

/// Where the reaction quadruple comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadSource {
    /// Path to a quadruple file, relative to the config file.
    File {
        file: PathBuf,
    },
    Inline(QuadSpec),
}

impl Default for QuadSource {
    fn default() -> Self {
        QuadSource::Inline(QuadSpec::default())
    }
}

/// Parameter points to visit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamSpec {
    Point {
        lambda: f64,
        mu: f64,
    },
    /// The diagonal `λ = μ = t/2`.
    Ray {
        t: Vec<f64>,
    },
    /// Every `(λ, μ)` of the product of the two ladders.
    Rectangle {
        lambda: Vec<f64>,
        mu: Vec<f64>,
    },
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec::Ray {
            t: vec![2.5, 3.0, 4.0, 6.0, 10.0, 20.0],
        }
    }
}

impl ParamSpec {
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            ParamSpec::Point { lambda, mu } => vec![(*lambda, *mu)],
            ParamSpec::Ray { t } => t.iter().map(|&t| (t / 2.0, t / 2.0)).collect(),
            ParamSpec::Rectangle { lambda, mu } => lambda
                .iter()
                .flat_map(|&l| mu.iter().map(move |&m| (l, m)))
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let increasing = |name: &str, xs: &[f64]| -> Result<()> {
            ensure!(!xs.is_empty(), "params.{name} is empty");
            ensure!(
                xs.iter().all(|x| x.is_finite() && *x >= 0.0),
                "params.{name} must hold finite nonnegative values"
            );
            if let Some(w) = xs.windows(2).find(|w| !(w[0] < w[1])) {
                bail!(
                    "params.{name} must be strictly increasing ({} then {})",
                    w[0],
                    w[1]
                );
            }
            Ok(())
        };
        match self {
            ParamSpec::Point { lambda, mu } => {
                ensure!(
                    lambda.is_finite() && mu.is_finite() && *lambda >= 0.0 && *mu >= 0.0,
                    "params: lambda and mu must be finite and nonnegative"
                );
                Ok(())
            }
            ParamSpec::Ray { t } => increasing("t", t),
            ParamSpec::Rectangle { lambda, mu } => {
                increasing("lambda", lambda)?;
                increasing("mu", mu)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Sup-norm step size that ends a monotone iteration.
    pub change: f64,
    /// Residual a converged solution must reach.
    pub residual: f64,
    pub max_iterations: usize,
    /// Sup-norm distance at which a solver solution matches an oracle root.
    pub oracle_match: f64,
    /// Ratio threshold for the combined sublinearity check.
    pub h2_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            change: 1e-10,
            residual: 1e-6,
            max_iterations: 10_000,
            oracle_match: 1e-3,
            h2_threshold: robin_rd::nonlinearity::H2_DEFAULT_THRESHOLD,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("change", self.change),
            ("residual", self.residual),
            ("oracle_match", self.oracle_match),
            ("h2_threshold", self.h2_threshold),
        ] {
            ensure!(
                v.is_finite() && v > 0.0,
                "tolerances.{name} must be positive, got {v}"
            );
        }
        ensure!(
            self.max_iterations > 0,
            "tolerances.max_iterations must be positive"
        );
        Ok(())
    }

    pub fn iteration(&self) -> IterationOptions {
        IterationOptions {
            change_tol: self.change,
            residual_tol: self.residual,
            max_iterations: self.max_iterations,
            shift: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootingConfig {
    pub density: usize,
    pub scan_steps: usize,
    pub refine_steps: usize,
    pub max_newton: usize,
    /// Scan box edge; derived from the supersolution when absent.
    pub box_max: Option<f64>,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        let o = ShootingOptions::default();
        Self {
            density: 128,
            scan_steps: o.scan_steps,
            refine_steps: o.refine_steps,
            max_newton: o.max_newton,
            box_max: None,
        }
    }
}

impl ShootingConfig {
    pub fn options(&self) -> ShootingOptions {
        ShootingOptions {
            scan_steps: self.scan_steps,
            refine_steps: self.refine_steps,
            max_newton: self.max_newton,
        }
    }
}

/// The `a < b` pair for the multiplicity window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowChoice {
    pub a: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub quad: QuadSource,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub c1_interpretation: C1Interpretation,
    #[serde(default)]
    pub supersolution: SuperCase,
    #[serde(default)]
    pub shooting: ShootingConfig,
    #[serde(default)]
    pub multiplicity: WindowChoice,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory that relative quad files are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_grid() -> usize {
    Grid1D::DEFAULT_INTERIOR
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            quad: QuadSource::default(),
            params: ParamSpec::default(),
            tolerances: Tolerances::default(),
            c1_interpretation: C1Interpretation::default(),
            supersolution: SuperCase::default(),
            shooting: ShootingConfig::default(),
            multiplicity: WindowChoice::default(),
            out: None,
            base_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config =
            Self::from_json(&text).with_context(|| format!("invalid config {}", path.display()))?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.grid >= Grid1D::MIN_INTERIOR,
            "grid must be at least {}, got {}",
            Grid1D::MIN_INTERIOR,
            self.grid
        );
        self.params.validate()?;
        self.tolerances.validate()?;
        if let C1Interpretation::Fixed(v) = self.c1_interpretation {
            ensure!(
                v.is_finite() && v > 0.0,
                "c1_interpretation must be positive, got {v}"
            );
        }
        ensure!(
            self.shooting.density >= 64 && self.shooting.scan_steps >= 1000,
            "shooting.density must be >= 64 and shooting.scan_steps >= 1000"
        );
        ensure!(
            self.shooting.refine_steps > 0 && self.shooting.max_newton > 0,
            "shooting.refine_steps and shooting.max_newton must be positive"
        );
        if let Some(b) = self.shooting.box_max {
            ensure!(
                b.is_finite() && b > 0.0,
                "shooting.box_max must be positive"
            );
        }
        if let (Some(a), Some(b)) = (self.multiplicity.a, self.multiplicity.b) {
            ensure!(
                a > 0.0 && a < b,
                "multiplicity needs 0 < a < b, got a = {a}, b = {b}"
            );
        }
        Ok(())
    }

    pub fn quad_spec(&self) -> Result<QuadSpec> {
        match &self.quad {
            QuadSource::Inline(spec) => Ok(spec.clone()),
            QuadSource::File { file } => {
                let path = match &self.base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("reading quad file {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid quad file {}", path.display()))
            }
        }
    }
}
