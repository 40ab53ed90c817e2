//! Correlation structures and the mean absolute correlation (MAC).

mod generators;
mod io;
mod spec;

pub use generators::{make_autoregressive, make_block, make_equal, make_sparse_random};
pub use io::{load_correlation, sample_correlation_from_data, save_correlation};
pub use spec::StructureSpec;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Scalar};

/// A validated `p × p` correlation matrix with a descriptive label.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix<T> {
    entries: Matrix<T>,
    label: String,
}

fn tolerance<T: Scalar>(base: f64) -> T {
    T::from_f64_lossy(base.max(10.0 * T::epsilon().as_f64()))
}

impl<T: Scalar> CorrelationMatrix<T> {
    /// Validates symmetry, unit diagonal and `|entry| ≤ 1` to within `1e-8`.
    pub fn new(entries: Matrix<T>, label: impl Into<String>) -> Result<Self> {
        check(&entries, tolerance(1e-8))?;
        Ok(Self {
            entries,
            label: label.into(),
        })
    }

    pub(crate) fn new_unchecked(entries: Matrix<T>, label: String) -> Self {
        Self { entries, label }
    }

    pub fn identity(p: usize) -> Self {
        Self::new_unchecked(Matrix::identity(p), "identity".into())
    }

    pub fn p(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    /// Applies the same permutation to rows and columns.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let p = self.p();
        if perm.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: perm.len(),
            });
        }
        let m = Matrix::from_fn(p, p, |i, j| self.entries[(perm[i], perm[j])]);
        Ok(Self::new_unchecked(m, self.label.clone()))
    }

    pub fn cast<U: Scalar>(&self) -> CorrelationMatrix<U> {
        CorrelationMatrix::new_unchecked(self.entries.cast(), self.label.clone())
    }
}

/// First violation of the correlation-matrix invariants, if any.
pub(crate) fn check<T: Scalar>(m: &Matrix<T>, tol: T) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix {
            row: m.rows(),
            col: m.cols(),
            reason: format!("not square ({} × {})", m.rows(), m.cols()),
        });
    }
    let p = m.rows();
    for i in 0..p {
        for j in 0..p {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::InvalidMatrix {
                    row: i,
                    col: j,
                    reason: "non-finite entry".into(),
                });
            }
            if i == j && (v - T::one()).abs() > tol {
                return Err(Error::InvalidMatrix {
                    row: i,
                    col: j,
                    reason: format!("diagonal entry {v} is not 1"),
                });
            }
            if v.abs() > T::one() + tol {
                return Err(Error::InvalidMatrix {
                    row: i,
                    col: j,
                    reason: format!("|{v}| exceeds 1"),
                });
            }
            if j > i && (v - m[(j, i)]).abs() > tol {
                return Err(Error::InvalidMatrix {
                    row: i,
                    col: j,
                    reason: format!("asymmetric: {v} vs {}", m[(j, i)]),
                });
            }
        }
    }
    Ok(())
}

/// Mean absolute correlation `ρ̄_Σ = Σ_ij |Σ_ij| / p²`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct MacLevel<T>(pub T);

impl<T: Scalar> MacLevel<T> {
    pub fn value(self) -> T {
        self.0
    }
}

/// Sums all `p²` absolute entries, diagonal included. Accumulates in `f64`.
pub fn mac<T: Scalar>(m: &CorrelationMatrix<T>) -> MacLevel<T> {
    let p = m.p();
    let total: f64 = (0..p)
        .map(|i| {
            m.entries
                .row(i)
                .iter()
                .map(|v| v.abs().as_f64())
                .sum::<f64>()
        })
        .sum();
    MacLevel(T::from_f64_lossy(total / (p as f64 * p as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_mac() {
        let m = CorrelationMatrix::<f64>::identity(2000);
        assert_eq!(mac(&m).value(), 0.0005);
    }

    #[test]
    fn rejects_bad_diagonal() {
        let m = Matrix::from_rows(&[vec![0.99, 0.3], vec![0.3, 1.0]]).unwrap();
        assert!(matches!(
            CorrelationMatrix::new(m, "x"),
            Err(Error::InvalidMatrix { row: 0, col: 0, .. })
        ));
    }

    proptest! {
        #[test]
        fn equal_correlation_closed_form(p in 1usize..120, rho in 0.0f64..0.999) {
            let m = make_equal::<f64>(p, rho).unwrap();
            let expected = rho + (1.0 - rho) / p as f64;
            prop_assert!((mac(&m).value() - expected).abs() <= 1e-14);
        }

        #[test]
        fn mac_is_permutation_invariant(p in 2usize..40, r in -0.95f64..0.95, seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let m = make_autoregressive::<f64>(p, r).unwrap();
            let mut perm: Vec<usize> = (0..p).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let q = m.permuted(&perm).unwrap();
            prop_assert!((mac(&m).value() - mac(&q).value()).abs() < 1e-15);
        }

        #[test]
        fn mac_lower_bound(p in 1usize..60, r in -0.9f64..0.9) {
            let m = make_autoregressive::<f64>(p, r).unwrap();
            let v = mac(&m).value();
            prop_assert!(v >= 1.0 / p as f64 - 1e-15);
            if r == 0.0 || p == 1 {
                prop_assert!((v - 1.0 / p as f64).abs() < 1e-15);
            } else {
                prop_assert!(v > 1.0 / p as f64);
            }
        }
    }
}
