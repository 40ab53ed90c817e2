use std::path::Path;

use super::CorrelationMatrix;
use crate::csvio;
use crate::error::{Error, Result};
use crate::numerics::linalg::dot;
use crate::numerics::{Matrix, Scalar};

const LOAD_TOL: f64 = 1e-6;

/// Loads a dense CSV correlation matrix. Asymmetry up to `1e-6` is removed
/// by averaging with the transpose; anything worse is rejected with the
/// first offending index.
pub fn load_correlation<T: Scalar>(path: &Path) -> Result<CorrelationMatrix<T>> {
    let rows = csvio::read_matrix(path)?;
    let p = rows.len();
    if p == 0 {
        return Err(Error::InvalidMatrix {
            row: 0,
            col: 0,
            reason: "empty matrix".into(),
        });
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(Error::InvalidMatrix {
            row: i,
            col: r.len().min(p),
            reason: format!("not square: {p} rows but row {i} has {} columns", r.len()),
        });
    }
    let m = Matrix::from_rows(&rows)?;
    super::check(&m, LOAD_TOL)?;
    let sym = Matrix::from_fn(p, p, |i, j| {
        if i == j {
            T::one()
        } else {
            T::from_f64_lossy(0.5 * (m[(i, j)] + m[(j, i)]))
        }
    });
    let label = path
        .file_stem()
        .map_or_else(|| "file".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(CorrelationMatrix::new_unchecked(sym, label))
}

pub fn save_correlation<T: Scalar>(path: &Path, m: &CorrelationMatrix<T>) -> Result<()> {
    let as_f64 = m.entries().cast::<f64>();
    csvio::write_matrix(path, None, (0..m.p()).map(|i| as_f64.row(i)))
}

/// Pearson correlation of the columns of the `n × p` data matrix `x`.
pub fn sample_correlation_from_data<T: Scalar>(x: &Matrix<T>) -> Result<CorrelationMatrix<T>> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::domain(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    // standardized columns, stored as rows for contiguous dot products
    let mut z = Matrix::<f64>::zeros(p, n);
    for j in 0..p {
        let col: Vec<f64> = (0..n).map(|i| x[(i, j)].as_f64()).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        if !(ss > 0.0) {
            return Err(Error::InvalidMatrix {
                row: 0,
                col: j,
                reason: format!("column {j} has zero variance"),
            });
        }
        let inv = 1.0 / ss.sqrt();
        for (dst, v) in z.row_mut(j).iter_mut().zip(&col) {
            *dst = (v - mean) * inv;
        }
    }
    let mut m = Matrix::<T>::identity(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let r = dot(z.row(i), z.row(j)).clamp(-1.0, 1.0);
            let r = T::from_f64_lossy(r);
            m[(i, j)] = r;
            m[(j, i)] = r;
        }
    }
    Ok(CorrelationMatrix::new_unchecked(m, "sample".into()))
}
