use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::baselines::BaselineOptions;
use crate::calibration::{GridMode, DEFAULT_ALPHA, DEFAULT_REPS};
use crate::dependence::{load_correlation, CorrelationMatrix, StructureSpec};
use crate::error::{Error, Result};

/// A generated structure or a correlation matrix read from CSV (`file:PATH`).
#[derive(Clone, Debug, PartialEq)]
pub enum StructureSource {
    Generated(StructureSpec),
    File(PathBuf),
}

impl StructureSource {
    pub fn load(&self) -> Result<CorrelationMatrix<f64>> {
        match self {
            Self::Generated(spec) => spec.build(),
            Self::File(path) => load_correlation(path),
        }
    }
}

impl fmt::Display for StructureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Generated(s) => s.fmt(f),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for StructureSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().strip_prefix("file:") {
            Some(path) => Ok(Self::File(PathBuf::from(path))),
            None => Ok(Self::Generated(s.parse()?)),
        }
    }
}

impl Serialize for StructureSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StructureSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Estimators a harness run can report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    Half,
    One,
    Adap,
    /// Integer-grid versions of the above.
    HalfStar,
    OneStar,
    AdapStar,
    Gw,
    Jc,
}

impl EstimatorName {
    pub const ALL: [EstimatorName; 8] = [
        Self::Half,
        Self::One,
        Self::Adap,
        Self::HalfStar,
        Self::OneStar,
        Self::AdapStar,
        Self::Gw,
        Self::Jc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Half => "half",
            Self::One => "one",
            Self::Adap => "adap",
            Self::HalfStar => "half_star",
            Self::OneStar => "one_star",
            Self::AdapStar => "adap_star",
            Self::Gw => "gw",
            Self::Jc => "jc",
        }
    }

    pub(crate) fn uses_observed(self) -> bool {
        matches!(self, Self::Half | Self::One | Self::Adap)
    }

    pub(crate) fn uses_integer(self) -> bool {
        matches!(self, Self::HalfStar | Self::OneStar | Self::AdapStar)
    }
}

impl fmt::Display for EstimatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|e| e.as_str()).collect();
                Error::spec(
                    s,
                    format!("unknown estimator; valid names are {}", names.join(", ")),
                )
            })
    }
}

/// Signal proportions (directly or as `π = p^{−γ}`) and signal means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalGrid {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
}

impl SignalGrid {
    /// Proportions for dimension `p`.
    pub fn proportions(&self, p: usize) -> Vec<f64> {
        if self.pi.is_empty() {
            self.gamma.iter().map(|g| (p as f64).powf(-g)).collect()
        } else {
            self.pi.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(alias = "R", default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_grid")]
    pub grid: GridMode,
}

fn default_reps() -> usize {
    DEFAULT_REPS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_grid() -> GridMode {
    GridMode::Observed
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            reps: DEFAULT_REPS,
            alpha: DEFAULT_ALPHA,
            grid: GridMode::Observed,
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}

fn default_estimators() -> Vec<EstimatorName> {
    vec![
        EstimatorName::Half,
        EstimatorName::One,
        EstimatorName::Adap,
        EstimatorName::Gw,
        EstimatorName::Jc,
    ]
}

/// A simulation experiment over structures × π × μ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub structures: Vec<StructureSource>,
    pub signal: SignalGrid,
    pub replications: usize,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorName>,
    #[serde(default)]
    pub baselines: BaselineOptions,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.structures.is_empty() {
            return bad("at least one structure is required".into());
        }
        if self.replications == 0 {
            return bad("replications must be positive".into());
        }
        if self.calibration.reps == 0 {
            return bad("calibration reps must be positive".into());
        }
        if !(self.calibration.alpha > 0.0 && self.calibration.alpha < 1.0) {
            return bad(format!(
                "calibration alpha = {} must be in (0, 1)",
                self.calibration.alpha
            ));
        }
        let s = &self.signal;
        match (s.pi.is_empty(), s.gamma.is_empty()) {
            (true, true) => return bad("signal needs either pi or gamma".into()),
            (false, false) => return bad("signal takes pi or gamma, not both".into()),
            _ => {}
        }
        if let Some(pi) = s.pi.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return bad(format!("signal proportion pi = {pi} must be in (0, 1)"));
        }
        if let Some(g) = s.gamma.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return bad(format!("sparsity exponent gamma = {g} must be positive"));
        }
        if s.mu.is_empty() {
            return bad("signal needs at least one mu".into());
        }
        if let Some(m) = s.mu.iter().find(|&&v| !(v >= 0.0 && v.is_finite())) {
            return bad(format!("signal mean mu = {m} must be finite and >= 0"));
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required".into());
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return bad("estimators are listed more than once".into());
        }
        if !(self.baselines.gw_alpha > 0.0 && self.baselines.gw_alpha < 1.0) {
            return bad(format!(
                "gw_alpha = {} must be in (0, 1)",
                self.baselines.gw_alpha
            ));
        }
        if !(self.baselines.jc_gamma > 0.0 && self.baselines.jc_gamma <= 0.5) {
            return bad(format!(
                "jc_gamma = {} must be in (0, 0.5]",
                self.baselines.jc_gamma
            ));
        }
        Ok(())
    }

    /// Reads a JSON (`.json`) or TOML (anything else) document.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
