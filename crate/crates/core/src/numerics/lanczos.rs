//! Smallest eigenvalue of a symmetric operator by Lanczos iteration with
//! full reorthogonalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Returns the smallest eigenvalue of the symmetric `dim × dim` operator
/// applied by `matvec(x, y)` (`y ← A·x`).
///
/// Iterates until the Ritz residual bound `β_k·|s_k|` drops below
/// `tol · max(1, |θ|)`.
pub fn smallest_eigenvalue<F>(dim: usize, tol: f64, mut matvec: F) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::domain("eigenvalue of an empty operator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut q);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    for k in 0..dim {
        matvec(&q, &mut w);
        let a = dotf(&q, &w);
        alpha.push(a);
        axpy(-a, &q, &mut w);
        if let Some(prev) = basis.last() {
            axpy(-beta[k - 1], prev, &mut w);
        }
        basis.push(q.clone());
        for _ in 0..2 {
            for v in &basis {
                let c = dotf(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);

        let exhausted =
            k + 1 == dim || b <= 1e-12 * alpha.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if exhausted || (k + 1) % 10 == 0 {
            let (theta, s_last) = tridiagonal_min_eig(&alpha, &beta);
            let residual = b * s_last.abs();
            if exhausted || residual <= tol * theta.abs().max(1.0) {
                return Ok(theta);
            }
        }
        beta.push(b);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / b;
        }
    }
    unreachable!("Lanczos terminates by dimension exhaustion")
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, together with the last component of
/// its unit eigenvector.
fn tridiagonal_min_eig(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let n = alpha.len();
    let off = |i: usize| if i < n - 1 { beta[i].abs() } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // Sturm count bisection for the smallest eigenvalue.
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 {
                beta[i - 1] * beta[i - 1]
            } else {
                0.0
            };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta, eigvec_last_component(alpha, beta, theta))
}

/// Inverse iteration on `T − θI` for the eigenvector; returns its last
/// component after normalization.
fn eigvec_last_component(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let n = alpha.len();
    if n == 1 {
        return 1.0;
    }
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
        .collect();
    normalize(&mut x);
    let scale = alpha.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let shift = theta - 1e-13 * scale;
    for _ in 0..3 {
        x = solve_tridiagonal(alpha, beta, shift, &x);
        normalize(&mut x);
    }
    x[n - 1]
}

/// Solves `(T − σI)·y = rhs` by Gaussian elimination with partial pivoting.
fn solve_tridiagonal(alpha: &[f64], beta: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    // Row i holds up to three nonzeros after pivoting: columns i, i+1, i+2.
    let mut d: Vec<f64> = alpha.iter().map(|a| a - sigma).collect();
    let mut du: Vec<f64> = beta.to_vec();
    du.resize(n, 0.0);
    let mut dl: Vec<f64> = beta.to_vec();
    dl.resize(n, 0.0);
    let mut du2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON * alpha.iter().fold(1.0f64, |m, a| m.max(a.abs()));

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() < tiny {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1].abs() < tiny {
        d[n - 1] = tiny;
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * y[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * y[i + 2];
        }
        y[i] = s / d[i];
    }
    y
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    super::linalg::dot(a, b)
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dotf(x, x).sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    for v in x.iter_mut() {
        *v /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense_matvec(a: &DMatrix<f64>) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            let n = a.nrows();
            for i in 0..n {
                y[i] = (0..n).map(|j| a[(i, j)] * x[j]).sum();
            }
        }
    }

    #[test]
    fn matches_dense_eigensolver_on_random_sparse_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [5usize, 40, 200] {
            let mut a = DMatrix::<f64>::identity(p, p);
            for i in 0..p {
                for j in (i + 1)..p {
                    if rng.random::<f64>() < 0.1 {
                        a[(i, j)] = 0.9;
                        a[(j, i)] = 0.9;
                    }
                }
            }
            let oracle = a.clone().symmetric_eigenvalues().min();
            let got = smallest_eigenvalue(p, 1e-12, dense_matvec(&a)).unwrap();
            assert!((got - oracle).abs() < 1e-9, "p={p}: {got} vs {oracle}");
        }
    }

    #[test]
    fn diagonal_operator() {
        let d = [3.0, -1.5, 2.0, 7.0];
        let got = smallest_eigenvalue(4, 1e-12, |x, y| {
            for i in 0..4 {
                y[i] = d[i] * x[i];
            }
        })
        .unwrap();
        assert!((got + 1.5).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_min_matches_dense() {
        let alpha = [2.0, -1.0, 0.5, 3.0, 1.0];
        let beta = [0.7, 1.2, -0.3, 0.9];
        let t = DMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (k, oracle) =
            eig.eigenvalues
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
                );
        let (theta, last) = tridiagonal_min_eig(&alpha, &beta);
        assert!((theta - oracle).abs() < 1e-12);
        assert!((last.abs() - eig.eigenvectors[(4, k)].abs()).abs() < 1e-8);
    }
}
