//! Run configuration: built from flags, optionally on top of a TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use magsphere::atlas::AxisSpec;
use magsphere::tolerance::RECORD_RESIDUAL;
use magsphere::{SystemParams, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    #[default]
    Simulate,
    Equilibria,
    Stability,
    Atlas,
    Reconstruct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Diagram {
    Threshold,
    Type1Stability,
    Ec,
    Bc,
    Appendix,
    Stability,
}

/// Which equilibrium solver to use. `Auto` picks the closed forms for
/// identical unit particles with the cot potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Auto,
    Closed,
    General,
}

/// `cot` or `table:<path>` (two-column `q,V` file).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    #[default]
    Cot,
    Table {
        path: PathBuf,
    },
}

impl FromStr for PotentialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cot" => Ok(PotentialSpec::Cot),
            _ => match s.strip_prefix("table:") {
                Some(path) if !path.is_empty() => Ok(PotentialSpec::Table { path: path.into() }),
                _ => Err(format!("unknown potential '{s}' (expected 'cot' or 'table:<path>')")),
            },
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Cot => f.write_str("cot"),
            PotentialSpec::Table { path } => write!(f, "table:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub q: Option<AxisSpec>,
    #[serde(rename = "B")]
    pub b: Option<AxisSpec>,
}

/// Initial reduced momenta for `simulate`; `q` comes from [`RunConfig::q`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialMomenta {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppendixConfig {
    pub slopes: Vec<f64>,
    pub h0: f64,
    pub levels: usize,
}

impl Default for AppendixConfig {
    fn default() -> Self {
        Self { slopes: vec![0.0, 1.0, 2.0], h0: 1e-2, levels: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: SystemParams,
    pub potential: PotentialSpec,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub solver: Solver,
    pub q: Option<f64>,
    pub initial: InitialMomenta,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub project_casimir: bool,
    /// Also integrate in `R³` and write the trajectory here.
    pub full_output_path: Option<PathBuf>,
    pub diagram: Option<Diagram>,
    /// Window samples per field strength for the `(B, C)` region.
    pub window_samples: usize,
    pub appendix: AppendixConfig,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::default(),
            params: SystemParams::identical(1.0),
            potential: PotentialSpec::Cot,
            grid: GridConfig::default(),
            tolerances: Tolerances { residual: RECORD_RESIDUAL, ..Tolerances::default() },
            output_path: None,
            format: Format::Csv,
            solver: Solver::Auto,
            q: None,
            initial: InitialMomenta::default(),
            dt: 1e-3,
            t_end: 10.0,
            sample_every: 10,
            project_casimir: false,
            full_output_path: None,
            diagram: None,
            window_samples: 200,
            appendix: AppendixConfig::default(),
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.command == CommandKind::Simulate && !(self.dt > 0.0 && self.t_end > 0.0) {
            return Err(CliError::Config(format!(
                "need dt > 0 and t-end > 0 (dt = {}, t-end = {})",
                self.dt, self.t_end
            )));
        }
        if self.command == CommandKind::Atlas && self.diagram.is_none() {
            return Err(CliError::Config("atlas needs --diagram".into()));
        }
        if self.tolerances.residual.is_nan() || self.tolerances.residual <= 0.0 {
            return Err(CliError::Config(format!("tolerance must be positive (got {})", self.tolerances.residual)));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        Ok(())
    }

    /// The distance axis: explicit grid, else the single `q`.
    pub fn q_axis(&self) -> Result<AxisSpec, CliError> {
        match (&self.grid.q, self.q) {
            (Some(axis), _) => Ok(axis.clone()),
            (None, Some(q)) => Ok(AxisSpec::new("q", q, q, 1)),
            (None, None) => Err(CliError::Config("need --q or --grid-q".into())),
        }
    }

    /// The field axis: explicit grid, else the single `B` of `params`.
    pub fn b_axis(&self) -> AxisSpec {
        self.grid.b.clone().unwrap_or_else(|| AxisSpec::new("B", self.params.b, self.params.b, 1))
    }

    pub fn use_closed_form(&self) -> Result<bool, CliError> {
        let eligible = self.params.is_identical_unit() && self.potential == PotentialSpec::Cot;
        match self.solver {
            Solver::Auto => Ok(eligible),
            Solver::General => Ok(false),
            Solver::Closed if eligible => Ok(true),
            Solver::Closed => {
                Err(CliError::Config("closed forms need identical unit particles and the cot potential".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_is_lossless() {
        let cfg = RunConfig {
            command: CommandKind::Atlas,
            params: SystemParams::new(0.7, 1.3, 1.0, -2.0, 2.5).unwrap(),
            potential: PotentialSpec::Table { path: "v.csv".into() },
            grid: GridConfig { q: Some(AxisSpec::new("q", 0.1, 3.0, 17)), b: None },
            q: Some(std::f64::consts::PI / 3.0),
            dt: 0.1 + 0.2,
            diagram: Some(Diagram::Type1Stability),
            output_path: Some("out.csv".into()),
            workers: Some(3),
            ..RunConfig::default()
        };
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml(&RunConfig::default().to_toml().unwrap()).unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("dt = 0.01\n[tolerances]\nclassify = 1e-9\n").unwrap();
        assert_eq!(cfg.dt, 0.01);
        assert_eq!(cfg.tolerances.classify, 1e-9);
        assert_eq!(cfg.tolerances.q_guard, Tolerances::default().q_guard);
        assert_eq!(cfg.params, SystemParams::identical(1.0));
    }

    #[test]
    fn potential_spec_parsing() {
        assert_eq!("cot".parse::<PotentialSpec>().unwrap(), PotentialSpec::Cot);
        assert_eq!(
            "table:/tmp/v.csv".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::Table { path: "/tmp/v.csv".into() }
        );
        assert!("coulomb".parse::<PotentialSpec>().is_err());
        assert!("table:".parse::<PotentialSpec>().is_err());
    }

    #[test]
    fn solver_selection() {
        let mut cfg = RunConfig::default();
        assert!(cfg.use_closed_form().unwrap());
        cfg.params.mu2 = 2.0;
        assert!(!cfg.use_closed_form().unwrap());
        cfg.solver = Solver::Closed;
        assert!(cfg.use_closed_form().is_err());
    }
}
