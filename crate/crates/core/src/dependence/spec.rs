use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{make_autoregressive, make_block, make_equal, make_sparse_random, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::numerics::{RngStream, Scalar};

pub const STRUCTURE_NAMES: [&str; 4] = ["ar", "equal", "block", "sparse"];

/// Textual description of a generated correlation structure, e.g.
/// `ar:p=2000,r=0.9` or `sparse:p=2000,prob=0.1,value=0.9,seed=1`.
#[derive(Clone, Debug, PartialEq)]
pub enum StructureSpec {
    Autoregressive {
        p: usize,
        r: f64,
    },
    Equal {
        p: usize,
        rho: f64,
    },
    Block {
        p: usize,
        size: usize,
        rho: f64,
    },
    Sparse {
        p: usize,
        prob: f64,
        value: f64,
        seed: u64,
    },
}

impl StructureSpec {
    pub fn p(&self) -> usize {
        match *self {
            Self::Autoregressive { p, .. }
            | Self::Equal { p, .. }
            | Self::Block { p, .. }
            | Self::Sparse { p, .. } => p,
        }
    }

    pub fn build<T: Scalar>(&self) -> Result<CorrelationMatrix<T>> {
        match *self {
            Self::Autoregressive { p, r } => make_autoregressive(p, T::from_f64_lossy(r)),
            Self::Equal { p, rho } => make_equal(p, T::from_f64_lossy(rho)),
            Self::Block { p, size, rho } => make_block(p, size, T::from_f64_lossy(rho)),
            Self::Sparse {
                p,
                prob,
                value,
                seed,
            } => make_sparse_random(p, prob, value, &RngStream::new(seed, 0)),
        }
    }
}

impl fmt::Display for StructureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Autoregressive { p, r } => write!(f, "ar:p={p},r={r}"),
            Self::Equal { p, rho } => write!(f, "equal:p={p},rho={rho}"),
            Self::Block { p, size, rho } => write!(f, "block:p={p},size={size},rho={rho}"),
            Self::Sparse {
                p,
                prob,
                value,
                seed,
            } => write!(f, "sparse:p={p},prob={prob},value={value},seed={seed}"),
        }
    }
}

struct Fields<'a> {
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn parse(body: &'a str, allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::spec(tok, "expected key=value"))?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(Error::spec(
                    tok,
                    format!("unknown key {k:?}; expected one of {}", allowed.join(", ")),
                ));
            }
            if values.insert(k, v.trim()).is_some() {
                return Err(Error::spec(tok, "duplicate key"));
            }
        }
        Ok(Self { values })
    }

    fn get<V: FromStr>(&self, key: &str) -> Result<V> {
        let raw = self
            .values
            .get(key)
            .ok_or_else(|| Error::spec(key, format!("missing required key {key:?}")))?;
        raw.parse()
            .map_err(|_| Error::spec(format!("{key}={raw}"), "value does not parse"))
    }

    fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        if self.values.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }
}

impl FromStr for StructureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim();
        let spec = match name {
            "ar" | "autoregressive" => {
                let f = Fields::parse(body, &["p", "r"])?;
                Self::Autoregressive {
                    p: f.get("p")?,
                    r: f.get("r")?,
                }
            }
            "equal" => {
                let f = Fields::parse(body, &["p", "rho"])?;
                Self::Equal {
                    p: f.get("p")?,
                    rho: f.get("rho")?,
                }
            }
            "block" => {
                let f = Fields::parse(body, &["p", "size", "rho"])?;
                Self::Block {
                    p: f.get("p")?,
                    size: f.get("size")?,
                    rho: f.get("rho")?,
                }
            }
            "sparse" => {
                let f = Fields::parse(body, &["p", "prob", "value", "seed"])?;
                Self::Sparse {
                    p: f.get("p")?,
                    prob: f.get_or("prob", 0.1)?,
                    value: f.get_or("value", 0.9)?,
                    seed: f.get_or("seed", 1)?,
                }
            }
            other => {
                return Err(Error::spec(
                    other,
                    format!(
                        "unknown structure; valid names are {}",
                        STRUCTURE_NAMES.join(", ")
                    ),
                ))
            }
        };
        if spec.p() == 0 {
            return Err(Error::spec("p=0", "p must be positive"));
        }
        Ok(spec)
    }
}

impl Serialize for StructureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StructureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
