use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::check::run_mac_c_table;
use super::config::{
    CalibrationConfig, EstimatorName, ExperimentConfig, SignalGrid, StructureSource,
};
use super::emit::{emit_mac_table, emit_results};
use super::experiment::run_table_experiment;
use crate::baselines::BaselineOptions;
use crate::calibration::{DEFAULT_ALPHA, DEFAULT_REPS};
use crate::error::{Error, Result};

/// Dimension of the simulated structures.
pub const PRESET_P: usize = 2000;
pub const SIGNAL_MEANS: [f64; 4] = [3.0, 4.0, 5.0, 6.0];
pub const FIGURE_PROPORTIONS: [f64; 2] = [0.02, 0.1];

/// Structures (a)–(d): AR(0.9), equal(0.5), block(400, 0.5), sparse(0.1, 0.9).
pub fn standard_structures(p: usize) -> Vec<StructureSource> {
    [
        format!("ar:p={p},r=0.9"),
        format!("equal:p={p},rho=0.5"),
        format!("block:p={p},size={},rho=0.5", p / 5),
        format!("sparse:p={p},prob=0.1,value=0.9,seed=1"),
    ]
    .iter()
    .map(|s| s.parse().expect("valid structure"))
    .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    pub fn replications(self) -> usize {
        match self {
            Self::Desk => 100,
            Self::Full => 1000,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Desk => "desk",
            Self::Full => "full",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            other => Err(Error::spec(other, "unknown scale; expected desk or full")),
        }
    }
}

/// A table or figure to regenerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Table(u8),
    Figure(u8),
}

impl Target {
    pub fn table(n: u8) -> Result<Self> {
        match n {
            1..=3 => Ok(Self::Table(n)),
            _ => Err(Error::spec(
                n.to_string(),
                "unknown table; expected 1, 2 or 3",
            )),
        }
    }

    pub fn figure(n: u8) -> Result<Self> {
        match n {
            2..=7 => Ok(Self::Figure(n)),
            _ => Err(Error::spec(
                n.to_string(),
                "unknown figure; expected 2 to 7",
            )),
        }
    }

    /// Whether the target needs a user-supplied correlation matrix.
    pub fn needs_sigma(self) -> bool {
        matches!(self, Self::Figure(6 | 7))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Table(n) => write!(f, "table{n}"),
            Self::Figure(n) => write!(f, "figure{n}"),
        }
    }
}

/// Experiment configuration behind a table (2 or 3) or figure.
pub fn preset_config(
    target: Target,
    scale: Scale,
    seed: u64,
    sigma: Option<&Path>,
) -> Result<ExperimentConfig> {
    let (structures, pi, estimators) = match target {
        Target::Table(1) => {
            return Err(Error::Config(
                "table 1 is a calibration table, not an experiment".into(),
            ))
        }
        Target::Table(n) => (
            standard_structures(PRESET_P),
            vec![if n == 2 { 0.02 } else { 0.1 }],
            vec![
                EstimatorName::Half,
                EstimatorName::One,
                EstimatorName::Adap,
                EstimatorName::Gw,
                EstimatorName::Jc,
            ],
        ),
        Target::Figure(n) => {
            let structure = if target.needs_sigma() {
                let path = sigma.ok_or_else(|| {
                    Error::Config(format!("figure {n} needs a correlation matrix file"))
                })?;
                StructureSource::File(path.to_path_buf())
            } else {
                standard_structures(PRESET_P).swap_remove(n as usize - 2)
            };
            (
                vec![structure],
                FIGURE_PROPORTIONS.to_vec(),
                vec![EstimatorName::Half, EstimatorName::One, EstimatorName::Adap],
            )
        }
    };
    let cfg = ExperimentConfig {
        name: format!("{target}-{scale}"),
        structures,
        signal: SignalGrid {
            pi,
            gamma: vec![],
            mu: SIGNAL_MEANS.to_vec(),
        },
        replications: scale.replications(),
        calibration: CalibrationConfig::default(),
        estimators,
        baselines: BaselineOptions::default(),
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `target` and writes its files into `out`. Table 1 produces
/// `mac_table.csv`; every other target produces the experiment outputs.
pub fn reproduce(
    target: Target,
    scale: Scale,
    seed: u64,
    sigma: Option<&Path>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    if target == Target::Table(1) {
        let rows = run_mac_c_table(
            &standard_structures(PRESET_P),
            DEFAULT_REPS,
            DEFAULT_ALPHA,
            seed,
        )?;
        return Ok(vec![emit_mac_table(&rows, out)?]);
    }
    let cfg = preset_config(target, scale, seed, sigma)?;
    emit_results(&run_table_experiment(&cfg)?, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::StructureSpec;

    #[test]
    fn standard_structures_match_labels() {
        let s = standard_structures(2000);
        assert_eq!(s[0].to_string(), "ar:p=2000,r=0.9");
        assert_eq!(s[2].to_string(), "block:p=2000,size=400,rho=0.5");
        assert!(matches!(
            s[3],
            StructureSource::Generated(StructureSpec::Sparse { p: 2000, .. })
        ));
    }

    #[test]
    fn presets() {
        let t2 = preset_config(Target::Table(2), Scale::Desk, 7, None).unwrap();
        assert_eq!(t2.replications, 100);
        assert_eq!(t2.signal.pi, vec![0.02]);
        assert_eq!(t2.structures.len(), 4);
        assert_eq!(t2.estimators.len(), 5);
        let f3 = preset_config(Target::Figure(3), Scale::Full, 1, None).unwrap();
        assert_eq!(f3.structures[0].to_string(), "equal:p=2000,rho=0.5");
        assert_eq!(f3.replications, 1000);
        assert!(preset_config(Target::Figure(6), Scale::Desk, 1, None).is_err());
        let f7 =
            preset_config(Target::Figure(7), Scale::Desk, 1, Some(Path::new("s.csv"))).unwrap();
        assert_eq!(f7.structures[0], StructureSource::File("s.csv".into()));
        assert!(preset_config(Target::Table(1), Scale::Desk, 1, None).is_err());
    }

    #[test]
    fn target_validation() {
        assert!(Target::table(4).is_err());
        assert!(Target::figure(1).is_err());
        assert!(Target::figure(8).is_err());
        assert_eq!("desk".parse::<Scale>().unwrap(), Scale::Desk);
        assert!("huge".parse::<Scale>().is_err());
    }
}
