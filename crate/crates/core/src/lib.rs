//! Estimating the proportion of signals among arbitrarily correlated test
//! statistics with calibrated bounding sequences.

#![allow(
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod baselines;
pub mod calibration;
pub mod csvio;
pub mod dependence;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod numerics;

pub use baselines::{pi_hat_gw, pi_hat_jc, BaselineOptions};
pub use calibration::{
    bounding_sequence, bounding_sequences, load_null_replicates, marginal_z_scores,
    permutation_null_replicates, save_null_replicates, simulate_null_replicates_parametric,
    v_statistic, BoundingSequence, BoundingSpec, GridMode, MarginalRegression, NullReplicates,
    Provenance,
};
pub use dependence::{mac, CorrelationMatrix, MacLevel, StructureSpec};
pub use error::{Error, Result};
pub use estimators::{
    estimate_pipeline, estimate_report, inverse_normal_transform, pi_hat_adaptive, pi_hat_delta,
    pi_hat_delta_discrete, EstimateReport, EstimateResult, Method, NullDistribution, ZScores,
};
pub use numerics::{Matrix, RngStream, Scalar};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type CorrelationMatrix64 = CorrelationMatrix<f64>;
pub type CorrelationMatrix32 = CorrelationMatrix<f32>;
pub type MacLevel64 = MacLevel<f64>;
pub type MacLevel32 = MacLevel<f32>;
