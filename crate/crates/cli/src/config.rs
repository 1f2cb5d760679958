//! Command-line flags and the versioned JSON configuration file. Every
//! parameter can come from either; a flag wins over the file, the file wins
//! over the built-in default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "nematic",
    version,
    about = "Nematic equilibria on annuli: stability diagrams, defect energies, PDE solves"
)]
pub struct Cli {
    /// JSON configuration file (`schema_version` 1); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical anisotropy δ_n(b) of the defect-free state, strong anchoring.
    StabilityStrong(StabilityStrongArgs),
    /// Critical curves δ_{1,k}(α) under weak anchoring.
    StabilityWeak(StabilityWeakArgs),
    /// Spiral equilibrium beyond the first instability.
    Spiral(SpiralArgs),
    /// Normalized or core-regularized energies of the four defect states.
    DefectStates(DefectStatesArgs),
    /// Finite-difference equilibrium on the annulus or a sector.
    PdeSolve(PdeSolveArgs),
    /// Pitchfork amplitude of the radial branch against δ.
    Bifurcation(BifurcationArgs),
    /// Landau-de Gennes order-parameter profile s or u.
    LdgProfile(LdgProfileArgs),
    /// Smallest eigenvalues of the Landau-de Gennes operators L_n.
    LdgStability(LdgStabilityArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::StabilityStrong(_) => "stability-strong",
            Self::StabilityWeak(_) => "stability-weak",
            Self::Spiral(_) => "spiral",
            Self::DefectStates(_) => "defect-states",
            Self::PdeSolve(_) => "pde-solve",
            Self::Bifurcation(_) => "bifurcation",
            Self::LdgProfile(_) => "ldg-profile",
            Self::LdgStability(_) => "ldg-stability",
        }
    }
}

#[derive(Debug, Args)]
pub struct StabilityStrongArgs {
    #[arg(long)]
    pub b_min: Option<f64>,
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Radial mode number n.
    #[arg(long)]
    pub mode: Option<u32>,
}

#[derive(Debug, Args)]
pub struct StabilityWeakArgs {
    #[arg(long)]
    pub b: Option<f64>,
    /// Azimuthal orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SpiralArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub k3: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DefectStatesArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Core radius; when given the table holds sector energies
    /// `K3 π (log(1/ε) + Ẽ)` instead of `Ẽ`.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub k3: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateArg {
    DefectFree,
    U1,
    U2,
    U3,
    D,
}

#[derive(Debug, Args)]
pub struct PdeSolveArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    /// Number of sectors for the defect states.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub nphi: Option<usize>,
    /// Weak anchoring strength (defect-free state on the annulus only).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Amplitude of the radial seed added to the defect-free start.
    #[arg(long)]
    pub perturb: Option<f64>,
    /// Core radius for the regularized energy of sector states.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub k3: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BifurcationArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub delta_min: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<f64>,
    #[arg(long)]
    pub nr: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileArg {
    S,
    U,
}

#[derive(Debug, Args)]
pub struct LdgProfileArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<ProfileArg>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LdgStabilityArgs {
    #[arg(long)]
    pub b_min: Option<f64>,
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Operator indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// `t` as a multiple of the sufficient threshold 3(b²+1)²/(2b⁴).
    #[arg(long)]
    pub t_factor: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    /// When present it must name the subcommand being run.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub elastic: ElasticConfig,
    #[serde(default)]
    pub anchoring: AnchoringConfig,
    #[serde(default)]
    pub ldg: LdgConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub b: Option<f64>,
    pub n_sectors: Option<u32>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticConfig {
    pub delta: Option<f64>,
    pub k3: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchoringConfig {
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdgConfig {
    pub t: Option<f64>,
    pub t_factor: Option<f64>,
    pub kind: Option<ProfileArg>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nr: Option<usize>,
    pub nphi: Option<usize>,
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub steps: Option<usize>,
    pub k: Option<Vec<u32>>,
    pub n: Option<Vec<u32>>,
    pub n_max: Option<u32>,
    pub mode: Option<u32>,
    pub seed: Option<f64>,
    pub state: Option<StateArg>,
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }
}

/// Flag, then config value, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn check_b(b: f64) -> Result<f64, CliError> {
    if b > 0.0 && b < 1.0 {
        Ok(b)
    } else {
        Err(CliError::Config(format!(
            "inner radius b = {b} must lie in (0, 1)"
        )))
    }
}

pub fn check_range(name: &str, lo: f64, hi: f64, steps: usize) -> Result<(), CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Config(format!(
            "{name} range [{lo}, {hi}] must be increasing"
        )));
    }
    if steps < 2 {
        return Err(CliError::Config(format!(
            "{name} sweep needs at least 2 steps, got {steps}"
        )));
    }
    Ok(())
}

/// `steps` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}
