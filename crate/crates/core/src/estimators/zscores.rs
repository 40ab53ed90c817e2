use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::special::student_t_to_z;
use crate::numerics::Z_CLAMP;

/// Null distribution `F_0` used to map raw statistics to normal scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NullDistribution {
    /// Inputs are already z-scores.
    Identity,
    Normal {
        mu: f64,
        sigma: f64,
    },
    StudentT {
        df: f64,
    },
}

impl fmt::Display for NullDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::Normal { mu, sigma } => write!(f, "normal:mu={mu},sigma={sigma}"),
            Self::StudentT { df } => write!(f, "t:df={df}"),
        }
    }
}

impl FromStr for NullDistribution {
    type Err = Error;

    /// `identity`, `normal:mu=0,sigma=1` or `t:df=10`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let mut mu = 0.0;
        let mut sigma = 1.0;
        let mut df = None;
        for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::spec(tok, "expected key=value"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::spec(tok, "value does not parse"))?;
            match (name.trim(), k.trim()) {
                ("normal", "mu") => mu = v,
                ("normal", "sigma") => sigma = v,
                ("t" | "student_t", "df") => df = Some(v),
                _ => return Err(Error::spec(tok, format!("unknown key for {name:?}"))),
            }
        }
        let dist = match name.trim() {
            "identity" => Self::Identity,
            "normal" => Self::Normal { mu, sigma },
            "t" | "student_t" => Self::StudentT {
                df: df.ok_or_else(|| Error::spec(s, "missing required key \"df\""))?,
            },
            other => {
                return Err(Error::spec(
                    other,
                    "unknown null distribution; valid names are identity, normal, t",
                ))
            }
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl NullDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Identity => Ok(()),
            Self::Normal { mu, sigma } => {
                if !(mu.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::domain(format!(
                        "normal null needs finite mu and sigma > 0 (got {mu}, {sigma})"
                    )));
                }
                Ok(())
            }
            Self::StudentT { df } => {
                if !(df >= 1.0 && df.is_finite()) {
                    return Err(Error::domain(format!(
                        "student t null needs df >= 1 (got {df})"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl Serialize for NullDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NullDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Normal scores `Z_j = Φ^{-1}(F_0(X_j))` with their transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScores {
    z: Vec<f64>,
    transform: NullDistribution,
    clamped: bool,
}

impl ZScores {
    /// Wraps values that are already z-scores.
    pub fn new(z: Vec<f64>) -> Result<Self> {
        inverse_normal_transform(&z, NullDistribution::Identity)
    }

    pub fn p(&self) -> usize {
        self.z.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn transform(&self) -> NullDistribution {
        self.transform
    }

    /// Whether any score hit `±Z_CLAMP`.
    pub fn clamped(&self) -> bool {
        self.clamped
    }
}

/// Applies `Φ^{-1} ∘ F_0` through the smaller tail so that large statistics
/// keep their precision; scores are clamped to `±Z_CLAMP`.
pub fn inverse_normal_transform(x: &[f64], f0: NullDistribution) -> Result<ZScores> {
    f0.validate()?;
    if x.is_empty() {
        return Err(Error::domain("empty statistic vector"));
    }
    if let Some(j) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!(
            "statistic {j} is not finite ({})",
            x[j]
        )));
    }
    let mut clamped = false;
    let mut clamp = |v: f64| {
        if v.abs() > Z_CLAMP {
            clamped = true;
            Z_CLAMP.copysign(v)
        } else {
            v
        }
    };
    let z = match f0 {
        NullDistribution::Identity => x.to_vec(),
        NullDistribution::Normal { mu, sigma } => {
            x.iter().map(|v| clamp((v - mu) / sigma)).collect()
        }
        NullDistribution::StudentT { df } => x
            .iter()
            .map(|&v| {
                let (z, c) = student_t_to_z(v, df);
                if c {
                    clamp(f64::INFINITY.copysign(z))
                } else {
                    z
                }
            })
            .collect(),
    };
    Ok(ZScores {
        z,
        transform: f0,
        clamped,
    })
}
