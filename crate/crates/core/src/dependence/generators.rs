use rand::Rng;

use super::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::numerics::lanczos::smallest_eigenvalue;
use crate::numerics::{Matrix, RngStream, Scalar};

fn check_dim(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::domain("dimension p must be positive"));
    }
    Ok(())
}

/// `Σ_ij = r^{|i−j|}`.
pub fn make_autoregressive<T: Scalar>(p: usize, r: T) -> Result<CorrelationMatrix<T>> {
    check_dim(p)?;
    if !(r.abs() < T::one()) {
        return Err(Error::domain(format!(
            "autoregressive r = {r} must satisfy |r| < 1"
        )));
    }
    let powers: Vec<T> = std::iter::successors(Some(T::one()), |x| Some(*x * r))
        .take(p)
        .collect();
    let m = Matrix::from_fn(p, p, |i, j| powers[i.abs_diff(j)]);
    Ok(CorrelationMatrix::new_unchecked(
        m,
        format!("autoregressive(r={r})"),
    ))
}

/// Unit diagonal with every off-diagonal equal to `rho`.
pub fn make_equal<T: Scalar>(p: usize, rho: T) -> Result<CorrelationMatrix<T>> {
    check_dim(p)?;
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(Error::domain(format!(
            "equal correlation rho = {rho} must be in [0, 1)"
        )));
    }
    let m = Matrix::from_fn(p, p, |i, j| if i == j { T::one() } else { rho });
    Ok(CorrelationMatrix::new_unchecked(
        m,
        format!("equal(rho={rho})"),
    ))
}

/// Square diagonal blocks of size `block` with off-diagonal `rho` inside
/// each block and zeros elsewhere. When `block` does not divide `p` the
/// last block is truncated.
pub fn make_block<T: Scalar>(p: usize, block: usize, rho: T) -> Result<CorrelationMatrix<T>> {
    check_dim(p)?;
    if block == 0 {
        return Err(Error::domain("block size must be positive"));
    }
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(Error::domain(format!(
            "block rho = {rho} must be in [0, 1)"
        )));
    }
    let m = Matrix::from_fn(p, p, |i, j| {
        if i == j {
            T::one()
        } else if i / block == j / block {
            rho
        } else {
            T::zero()
        }
    });
    Ok(CorrelationMatrix::new_unchecked(
        m,
        format!("block(size={block},rho={rho})"),
    ))
}

/// Random sparse structure: `Σ*` has unit diagonal and
/// `σ_ij = σ_ji = value · Bernoulli(prob)` for `i < j`; the result is
/// `(Σ* + δI)/(1 + δ)` with `δ = |λ_min(Σ*)| + 0.05`.
///
/// Bernoulli draws are taken from `stream` in row-major order over `i < j`.
pub fn make_sparse_random<T: Scalar>(
    p: usize,
    prob: f64,
    value: f64,
    stream: &RngStream,
) -> Result<CorrelationMatrix<T>> {
    check_dim(p)?;
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::domain(format!(
            "sparse prob = {prob} must be in (0, 1)"
        )));
    }
    if !(value.abs() < 1.0) {
        return Err(Error::domain(format!(
            "sparse value = {value} must satisfy |value| < 1"
        )));
    }
    let mut rng = stream.generator();
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); p];
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random::<f64>() < prob {
                neighbours[i].push(j);
                neighbours[j].push(i);
            }
        }
    }
    let lambda_min = smallest_eigenvalue(p, 1e-10, |x, y| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = x[i] + value * neighbours[i].iter().map(|&j| x[j]).sum::<f64>();
        }
    })?;
    let shift = lambda_min.abs() + 0.05;
    let off = T::from_f64_lossy(value / (1.0 + shift));
    let mut m = Matrix::identity(p);
    for (i, nb) in neighbours.iter().enumerate() {
        for &j in nb {
            m[(i, j)] = off;
        }
    }
    Ok(CorrelationMatrix::new_unchecked(
        m,
        format!("sparse(prob={prob},value={value},seed={})", stream.seed),
    ))
}
