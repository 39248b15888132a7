//! Run configuration (JSON) and sweep settings.

use std::fmt;
use std::path::{Path, PathBuf};

use nlss_core::{build_grid, eigendecompose, DomainSpec, Grid, SolverOptions, Spectrum, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauMode {
    #[default]
    Explicit,
    /// Both `τ` snap to the discrete principal eigenvalue.
    Lambda1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default)]
    pub tau1: Option<f64>,
    #[serde(default)]
    pub tau2: Option<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Json, Format::Csv] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub params: ParamsConfig,
    #[serde(default)]
    pub tau_mode: TauMode,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Grid, spectrum and validated parameters of a configuration.
pub struct Setup {
    pub grid: Grid,
    pub spectrum: Spectrum,
    pub params: SystemParams,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// `τ` values for the given principal eigenvalue.
    pub fn taus(&self, lambda1: f64) -> Result<(f64, f64), ConfigError> {
        match self.tau_mode {
            TauMode::Lambda1 => {
                if self.params.tau1.is_some() || self.params.tau2.is_some() {
                    return Err(ConfigError::Invalid("tau1/tau2 must be omitted when tau_mode is lambda1".into()));
                }
                Ok((lambda1, lambda1))
            }
            TauMode::Explicit => match (self.params.tau1, self.params.tau2) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(ConfigError::Invalid("tau1 and tau2 are required when tau_mode is explicit".into())),
            },
        }
    }

    pub fn setup(&self) -> Result<Setup, ConfigError> {
        let grid = build_grid(&self.domain).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let spectrum = eigendecompose(&grid);
        let (tau1, tau2) = self.taus(spectrum.lambda1())?;
        let p = &self.params;
        let params = SystemParams::new(tau1, tau2, p.mu1, p.mu2, p.beta).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.check_solver()?;
        Ok(Setup { grid, spectrum, params })
    }

    fn check_solver(&self) -> Result<(), ConfigError> {
        let s = &self.solver;
        let positive = [("tol_newton", s.tol_newton), ("tol_sphere", s.tol_sphere), ("tol_eig", s.tol_eig)];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be > 0")));
            }
        }
        if s.max_iter == 0 {
            return Err(ConfigError::Invalid("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    Beta,
    Mu1,
    Mu2,
    Tau1,
    Tau2,
}

impl SweepVar {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "beta" => Ok(Self::Beta),
            "mu1" => Ok(Self::Mu1),
            "mu2" => Ok(Self::Mu2),
            "tau1" => Ok(Self::Tau1),
            "tau2" => Ok(Self::Tau2),
            _ => Err(ConfigError::Invalid(format!("cannot vary `{s}` (expected beta, mu1, mu2, tau1 or tau2)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::Mu1 => "mu1",
            Self::Mu2 => "mu2",
            Self::Tau1 => "tau1",
            Self::Tau2 => "tau2",
        }
    }

    pub fn apply(&self, p: &SystemParams, v: f64) -> SystemParams {
        let mut q = *p;
        match self {
            Self::Beta => q.beta = v,
            Self::Mu1 => q.mu1 = v,
            Self::Mu2 => q.mu2 = v,
            Self::Tau1 => q.tau1 = v,
            Self::Tau2 => q.tau2 = v,
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub vary: SweepVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn validate(&self, cfg: &RunConfig) -> Result<(), ConfigError> {
        if !(self.from.is_finite() && self.to.is_finite()) || !(self.from < self.to) {
            return Err(ConfigError::Invalid("sweep needs from < to".into()));
        }
        if self.steps < 2 {
            return Err(ConfigError::Invalid("sweep needs steps >= 2".into()));
        }
        if self.scale == Scale::Log && !(self.from > 0.0) {
            return Err(ConfigError::Invalid("log sweep needs from > 0".into()));
        }
        if cfg.tau_mode == TauMode::Lambda1 && matches!(self.vary, SweepVar::Tau1 | SweepVar::Tau2) {
            return Err(ConfigError::Invalid("cannot vary tau when tau_mode is lambda1".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let s = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.from + s * (self.to - self.from),
                    Scale::Log => (self.from.ln() + s * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect()
    }
}
