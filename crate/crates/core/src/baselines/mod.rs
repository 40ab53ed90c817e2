//! Comparison estimators: a DKW lower bound on the p-value ECDF (GW) and a
//! Fourier-based estimator with a triangular kernel (JC).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimateResult, Method, Sup, ZScores};
use crate::numerics::quadrature::integrate;
use crate::numerics::special::normal_sf;

pub const DEFAULT_GW_ALPHA: f64 = 0.05;
pub const DEFAULT_JC_GAMMA: f64 = 0.5;
const JC_TOL: f64 = 1e-8;

/// Tuning of the baseline estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub gw_alpha: f64,
    pub jc_gamma: f64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            gw_alpha: DEFAULT_GW_ALPHA,
            jc_gamma: DEFAULT_JC_GAMMA,
        }
    }
}

/// `sup_u (F̂(u) − u − ε)/(1 − u)` over the sorted two-sided p-values, with
/// `ε = √(ln(2/α)/(2p))`.
pub fn pi_hat_gw(z: &ZScores, alpha: f64) -> Result<EstimateResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be in (0, 1)")));
    }
    let p = z.p();
    let eps = ((2.0 / alpha).ln() / (2.0 * p as f64)).sqrt();
    let mut abs: Vec<f64> = z.values().iter().map(|v| v.abs()).collect();
    // decreasing |z| is increasing u
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut sup = Sup::new();
    let mut i = 0;
    while i < p {
        let t = abs[i];
        let mut j = i + 1;
        while j < p && abs[j] == t {
            j += 1;
        }
        let u = 2.0 * normal_sf(t);
        if u < 1.0 - 1e-8 {
            sup.offer((j as f64 / p as f64 - u - eps) / (1.0 - u), t);
        }
        i = j;
    }
    Ok(EstimateResult::from_raw(Method::Gw, None, Vec::new(), sup))
}

/// `φ(t; z) = ∫_{−1}^{1} (1 − |ξ|) cos(tξz) e^{t²ξ²/2} dξ`.
pub fn jc_phi(t: f64, z: f64) -> Result<f64> {
    let half = integrate(
        |xi| (1.0 - xi) * (t * xi * z).cos() * (0.5 * t * t * xi * xi).exp(),
        0.0,
        1.0,
        0.5 * JC_TOL,
    )
    .map_err(|e| Error::Quadrature(format!("jc phi at t = {t}, z = {z}: {e}")))?;
    Ok(2.0 * half)
}

/// `1 − p⁻¹ Σ_j φ(t_p; z_j)` with `t_p = √(2γ ln p)`.
pub fn pi_hat_jc(z: &ZScores, gamma: f64) -> Result<EstimateResult> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(Error::domain(format!(
            "gamma = {gamma} must be in (0, 0.5]"
        )));
    }
    let p = z.p();
    if p < 2 {
        return Err(Error::domain("the JC estimator needs p >= 2"));
    }
    let t = (2.0 * gamma * (p as f64).ln()).sqrt();
    let mut phis: Vec<f64> = z
        .values()
        .par_iter()
        .map(|&zj| jc_phi(t, zj))
        .collect::<Result<_>>()?;
    // sorted summation order
    phis.sort_unstable_by(f64::total_cmp);
    let mean = phis.iter().sum::<f64>() / p as f64;
    let sup = Sup {
        value: 1.0 - mean,
        argmax: Some(t),
    };
    Ok(EstimateResult::from_raw(Method::Jc, None, Vec::new(), sup))
}
