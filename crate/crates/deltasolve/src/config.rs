//! JSON run configurations for the command-line driver.
//!
//! The schema shipped in `schema/runconfig.schema.json` mirrors these types;
//! validation errors carry the JSON path of the offending field so the CLI
//! can report it and exit with the config-error code.

use serde::{Deserialize, Serialize};

use crate::dispersive::GridSpec;
use crate::error::Result;
use crate::gamma::InteractionConfig;
use crate::propagator::{CutoffProfile, CutoffSpec, EvolveOptions};
use crate::resolvent::{GaussianSum, GaussianTerm};
use crate::Complex64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub interaction: InteractionSpec,
    pub initial_data: DataSpec,
    #[serde(default = "default_time_grid")]
    pub time_grid: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_time_grid() -> Vec<f64> {
    crate::dispersive::default_times()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub centers: Vec<[f64; 3]>,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSpec {
    pub gaussians: Vec<GaussianSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub amp_re: f64,
    #[serde(default)]
    pub amp_im: f64,
    pub center: [f64; 3],
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub radial_count: usize,
    pub box_halfwidth: f64,
    pub box_per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            r_min: g.r_min,
            r_max: g.r_max,
            radial_count: g.radial_count,
            box_halfwidth: g.box_halfwidth,
            box_per_axis: g.box_per_axis,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub m0: f64,
    pub tol: f64,
    pub panel_cap: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let o = EvolveOptions::default();
        Self { m0: o.cutoff.m0, tol: o.tol, panel_cap: o.panel_cap, max_doublings: o.max_doublings }
    }
}

/// Evolution mode of the `evolve` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMode {
    #[default]
    Full,
    ClosedForm,
    Spectral,
    Both,
    Free,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub mode: EvolveMode,
    pub continuous_only: bool,
    /// evaluation points for the `evolve` command
    pub points: Vec<[f64; 3]>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { mode: EvolveMode::Full, continuous_only: false, points: vec![[1.0, 0.0, 0.0]] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<String>,
}

/// A config-file violation, carrying the JSON path of the offending field.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            path: "(document)".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let err = |path: &str, message: String| Err(ConfigError { path: path.into(), message });
        if self.interaction.centers.is_empty() {
            return err("interaction.centers", "at least one center required".into());
        }
        if self.interaction.centers.len() != self.interaction.alphas.len() {
            return err(
                "interaction.alphas",
                format!(
                    "length {} does not match centers length {}",
                    self.interaction.alphas.len(),
                    self.interaction.centers.len()
                ),
            );
        }
        for (i, c) in self.interaction.centers.iter().enumerate() {
            if !c.iter().all(|v| v.is_finite()) {
                return err(&format!("interaction.centers[{i}]"), "non-finite coordinate".into());
            }
        }
        for (i, a) in self.interaction.alphas.iter().enumerate() {
            if !a.is_finite() {
                return err(&format!("interaction.alphas[{i}]"), "non-finite strength".into());
            }
        }
        if self.initial_data.gaussians.is_empty() {
            return err("initial_data.gaussians", "at least one gaussian required".into());
        }
        for (i, g) in self.initial_data.gaussians.iter().enumerate() {
            if !(g.sigma > 0.0) || !g.sigma.is_finite() {
                return err(
                    &format!("initial_data.gaussians[{i}].sigma"),
                    format!("must be positive, got {}", g.sigma),
                );
            }
            if !g.amp_re.is_finite() || !g.amp_im.is_finite() {
                return err(&format!("initial_data.gaussians[{i}]"), "non-finite amplitude".into());
            }
            if !g.center.iter().all(|v| v.is_finite()) {
                return err(&format!("initial_data.gaussians[{i}].center"), "non-finite".into());
            }
        }
        if self.time_grid.is_empty() {
            return err("time_grid", "must contain at least one time".into());
        }
        for (i, w) in self.time_grid.windows(2).enumerate() {
            if w[1] <= w[0] {
                return err(&format!("time_grid[{}]", i + 1), "times must be strictly increasing".into());
            }
        }
        if !(self.time_grid[0] > 0.0) {
            return err("time_grid[0]", "times must be positive".into());
        }
        if !(self.quadrature.m0 > 0.0) {
            return err("quadrature.m0", format!("must be positive, got {}", self.quadrature.m0));
        }
        if !(self.quadrature.tol > 0.0) {
            return err("quadrature.tol", format!("must be positive, got {}", self.quadrature.tol));
        }
        if !(self.quadrature.panel_cap > 0.0) {
            return err(
                "quadrature.panel_cap",
                format!("must be positive, got {}", self.quadrature.panel_cap),
            );
        }
        if !(self.grid.r_min > 0.0) || !(self.grid.r_max > self.grid.r_min) {
            return err("grid.r_min", "need 0 < r_min < r_max".into());
        }
        if self.grid.radial_count < 2 {
            return err("grid.radial_count", "need at least 2 radii".into());
        }
        if self.evolve.points.is_empty() {
            return err("evolve.points", "at least one evaluation point required".into());
        }
        Ok(())
    }

    pub fn interaction(&self) -> Result<InteractionConfig> {
        InteractionConfig::new(self.interaction.centers.clone(), self.interaction.alphas.clone())
    }

    pub fn datum(&self) -> Result<GaussianSum> {
        GaussianSum::new(
            self.initial_data
                .gaussians
                .iter()
                .map(|g| GaussianTerm {
                    amplitude: Complex64::new(g.amp_re, g.amp_im),
                    center: g.center,
                    sigma: g.sigma,
                })
                .collect(),
        )
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            r_min: self.grid.r_min,
            r_max: self.grid.r_max,
            radial_count: self.grid.radial_count,
            box_halfwidth: self.grid.box_halfwidth,
            box_per_axis: self.grid.box_per_axis,
        }
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            continuous_only: self.evolve.continuous_only,
            cutoff: CutoffSpec { m0: self.quadrature.m0, profile: CutoffProfile::ExpBump },
            tol: self.quadrature.tol,
            panel_cap: self.quadrature.panel_cap,
            max_doublings: self.quadrature.max_doublings,
        }
    }
}
