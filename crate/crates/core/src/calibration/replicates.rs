use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::dependence::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::numerics::linalg::dot;
use crate::numerics::special::student_t_to_z;
use crate::numerics::{cholesky, sample_mvn_with, Matrix, RngStream, Scalar};

/// Where a set of null replicates (and anything calibrated from it) came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Parametric {
        label: String,
        seed: u64,
    },
    Permutation {
        seed: u64,
    },
    External {
        path: PathBuf,
    },
    /// A user-supplied constant, not calibrated.
    Fixed,
}

impl Provenance {
    pub fn seed(&self) -> Option<u64> {
        match *self {
            Self::Parametric { seed, .. } | Self::Permutation { seed } => Some(seed),
            Self::External { .. } | Self::Fixed => None,
        }
    }
}

/// `R × p` statistics drawn from (or permuted under) the joint null.
#[derive(Clone, Debug, PartialEq)]
pub struct NullReplicates {
    values: Matrix<f64>,
    provenance: Provenance,
}

impl NullReplicates {
    pub fn new(values: Matrix<f64>, provenance: Provenance) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::domain(
                "null replicates need at least one row and column",
            ));
        }
        Ok(Self { values, provenance })
    }

    pub fn r(&self) -> usize {
        self.values.rows()
    }

    pub fn p(&self) -> usize {
        self.values.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn values(&self) -> &Matrix<f64> {
        &self.values
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

fn stack(rows: Vec<Vec<f64>>, p: usize) -> Result<Matrix<f64>> {
    let r = rows.len();
    Matrix::from_vec(r, p, rows.into_iter().flatten().collect())
}

/// `R` draws from `N_p(0, Σ)`; row `i` uses stream `(seed, i)`.
pub fn simulate_null_replicates_parametric<T: Scalar>(
    sigma: &CorrelationMatrix<T>,
    r: usize,
    seed: u64,
) -> Result<NullReplicates> {
    if r == 0 {
        return Err(Error::domain("replicate count must be positive"));
    }
    let factor = cholesky(sigma.entries())?;
    let p = sigma.p();
    let mean = vec![T::zero(); p];
    let rows: Vec<Vec<f64>> = (0..r as u64)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); p],
            |scratch, i| {
                let mut out = vec![T::zero(); p];
                let mut rng = RngStream::new(seed, i).generator();
                sample_mvn_with(&factor, &mean, &mut rng, scratch, &mut out)?;
                Ok(out.into_iter().map(Scalar::as_f64).collect())
            },
        )
        .collect::<Result<_>>()?;
    NullReplicates::new(
        stack(rows, p)?,
        Provenance::Parametric {
            label: sigma.label().to_string(),
            seed,
        },
    )
}

/// Simple regressions of one response on each column of `X`, with the
/// centred design cached so that many responses can be scored cheaply.
#[derive(Clone, Debug)]
pub struct MarginalRegression {
    n: usize,
    // centred columns stored as rows
    centred: Matrix<f64>,
    sxx: Vec<f64>,
}

impl MarginalRegression {
    pub fn new(x: &Matrix<f64>) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if n < 3 {
            return Err(Error::domain(format!(
                "need at least 3 observations, got {n}"
            )));
        }
        if p == 0 {
            return Err(Error::domain("design matrix has no columns"));
        }
        let mut centred = Matrix::zeros(p, n);
        let mut sxx = Vec::with_capacity(p);
        for j in 0..p {
            let col = x.column(j);
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidMatrix {
                    row: i,
                    col: j,
                    reason: "non-finite entry".into(),
                });
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            let dst = centred.row_mut(j);
            for (d, v) in dst.iter_mut().zip(&col) {
                *d = v - mean;
            }
            let ss = dot(dst, dst);
            if !(ss > 0.0) || col.iter().all(|&v| v == col[0]) {
                return Err(Error::InvalidMatrix {
                    row: 0,
                    col: j,
                    reason: format!("column {j} is constant"),
                });
            }
            sxx.push(ss);
        }
        Ok(Self { n, centred, sxx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.sxx.len()
    }

    /// Slope t-statistics mapped to normal scores (clamped to `±Z_CLAMP`).
    pub fn z_scores(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("response contains non-finite values"));
        }
        let ybar = y.iter().sum::<f64>() / self.n as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
        let syy = dot(&yc, &yc);
        if !(syy > 0.0) {
            return Err(Error::domain("response is constant"));
        }
        let df = (self.n - 2) as f64;
        Ok(self
            .sxx
            .iter()
            .enumerate()
            .map(|(j, &sxx)| {
                let sxy = dot(self.centred.row(j), &yc);
                let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
                let resid = 1.0 - r * r;
                let t = if resid > 0.0 {
                    r * (df / resid).sqrt()
                } else {
                    f64::INFINITY.copysign(r)
                };
                student_t_to_z(t, df).0
            })
            .collect())
    }

    fn permuted_rows(
        &self,
        y: &[f64],
        r: usize,
        permute: impl Fn(u64, &mut [f64]) + Sync,
    ) -> Result<Matrix<f64>> {
        let rows: Vec<Vec<f64>> = (0..r as u64)
            .into_par_iter()
            .map(|i| {
                let mut yp = y.to_vec();
                permute(i, &mut yp);
                self.z_scores(&yp)
            })
            .collect::<Result<_>>()?;
        stack(rows, self.p())
    }
}

/// Normal scores of the marginal regressions of `y` on each column of `X`.
pub fn marginal_z_scores(x: &Matrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    MarginalRegression::new(x)?.z_scores(y)
}

/// Row `i` holds the marginal scores after shuffling `y` with stream `(seed, i)`.
pub fn permutation_null_replicates(
    x: &Matrix<f64>,
    y: &[f64],
    r: usize,
    seed: u64,
) -> Result<NullReplicates> {
    if r == 0 {
        return Err(Error::domain("replicate count must be positive"));
    }
    let reg = MarginalRegression::new(x)?;
    let values = reg.permuted_rows(y, r, |i, yp| {
        yp.shuffle(&mut RngStream::new(seed, i).generator());
    })?;
    NullReplicates::new(values, Provenance::Permutation { seed })
}

/// Reads a CSV whose rows are replicates.
pub fn load_null_replicates(path: &Path) -> Result<NullReplicates> {
    let rows = csvio::read_matrix(path)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            msg: "no replicate rows".into(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: i + 1,
                col: j + 1,
                msg: format!("non-finite value {}", row[j]),
            });
        }
    }
    NullReplicates::new(
        Matrix::from_rows(&rows)?,
        Provenance::External {
            path: path.to_path_buf(),
        },
    )
}

pub fn save_null_replicates(path: &Path, reps: &NullReplicates) -> Result<()> {
    csvio::write_matrix(path, None, (0..reps.r()).map(|i| reps.row(i)))
}
