//! Special functions, dense linear algebra and seeded sampling.

pub mod lanczos;
pub mod linalg;
pub mod mvn;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;

pub use linalg::{cholesky, CholeskyFactor, Matrix};
pub use mvn::{sample_mvn, sample_mvn_with};
pub use rng::{mix_seed, RngStream, StreamRng};
pub use scalar::Scalar;
pub use special::{
    log_std_normal_sf, std_normal_cdf, std_normal_isf, std_normal_pdf, std_normal_quantile,
    std_normal_sf, student_t_cdf, Z_CLAMP,
};
