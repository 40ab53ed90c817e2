use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::CholeskyFactor;
use super::rng::RngStream;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Draws `mean + L·g` with `g` i.i.d. standard normal from `rng`.
///
/// `scratch` must hold at least `factor.dim()` entries.
pub fn sample_mvn_with<T: Scalar, R: Rng + ?Sized>(
    factor: &CholeskyFactor<T>,
    mean: &[T],
    rng: &mut R,
    scratch: &mut [T],
    out: &mut [T],
) -> Result<()> {
    let p = factor.dim();
    if mean.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: mean.len(),
        });
    }
    if out.len() != p || scratch.len() < p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: out.len().min(scratch.len()),
        });
    }
    for g in scratch[..p].iter_mut() {
        let v: f64 = rng.sample(StandardNormal);
        *g = T::from_f64_lossy(v);
    }
    factor.mul_into(&scratch[..p], out);
    for (o, m) in out.iter_mut().zip(mean) {
        *o = *o + *m;
    }
    Ok(())
}

/// One draw from `N_p(mean, L·Lᵀ)` using its own stream.
pub fn sample_mvn<T: Scalar>(
    factor: &CholeskyFactor<T>,
    mean: &[T],
    stream: &RngStream,
) -> Result<Vec<T>> {
    let p = factor.dim();
    let mut scratch = vec![T::zero(); p];
    let mut out = vec![T::zero(); p];
    sample_mvn_with(
        factor,
        mean,
        &mut stream.generator(),
        &mut scratch,
        &mut out,
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::{cholesky, Matrix};
    use rayon::prelude::*;

    #[test]
    fn identity_draws_have_zero_mean() {
        let f = cholesky(&Matrix::<f64>::identity(3)).unwrap();
        let n = 100_000;
        let mut rng = RngStream::new(1, 0).generator();
        let mut scratch = vec![0.0; 3];
        let mut out = vec![0.0; 3];
        let mut sums = [0.0; 3];
        for _ in 0..n {
            sample_mvn_with(&f, &[0.0; 3], &mut rng, &mut scratch, &mut out).unwrap();
            for k in 0..3 {
                sums[k] += out[k];
            }
        }
        for s in sums {
            assert!((s / n as f64).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn equal_correlation_draws() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let f = cholesky(&m).unwrap();
        let n = 100_000;
        let mut rng = RngStream::new(2, 0).generator();
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut scratch = vec![0.0; 2];
        let mut out = vec![0.0; 2];
        for _ in 0..n {
            sample_mvn_with(&f, &[0.0, 0.0], &mut rng, &mut scratch, &mut out).unwrap();
            sx += out[0];
            sy += out[1];
            sxx += out[0] * out[0];
            syy += out[1] * out[1];
            sxy += out[0] * out[1];
        }
        let nf = n as f64;
        let cov = sxy / nf - sx * sy / nf / nf;
        let r = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        assert!((r - 0.5).abs() < 0.02, "r={r}");
    }

    #[test]
    fn deterministic_per_stream() {
        let f = cholesky(&Matrix::<f64>::identity(4)).unwrap();
        let s = RngStream::new(77, 3);
        assert_eq!(
            sample_mvn(&f, &[1.0; 4], &s).unwrap(),
            sample_mvn(&f, &[1.0; 4], &s).unwrap()
        );
    }

    #[test]
    fn parallel_batch_matches_serial() {
        let m = Matrix::from_fn(6, 6, |i, j| 0.6f64.powi((i as i32 - j as i32).abs()));
        let f = cholesky(&m).unwrap();
        let mean = vec![0.0; 6];
        let serial: Vec<Vec<f64>> = (0..64)
            .map(|r| sample_mvn(&f, &mean, &RngStream::new(5, r)).unwrap())
            .collect();
        let parallel: Vec<Vec<f64>> = (0..64u64)
            .into_par_iter()
            .map(|r| sample_mvn(&f, &mean, &RngStream::new(5, r)).unwrap())
            .collect();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn dimension_mismatch() {
        let f = cholesky(&Matrix::<f64>::identity(3)).unwrap();
        assert!(sample_mvn(&f, &[0.0; 2], &RngStream::new(0, 0)).is_err());
    }
}
