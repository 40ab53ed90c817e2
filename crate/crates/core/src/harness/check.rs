use serde::{Deserialize, Serialize};

use super::config::StructureSource;
use super::experiment::{calibration_seed, mean_sd};
use crate::calibration::{
    bounding_sequences, simulate_null_replicates_parametric, BoundingSpec, GridMode,
};
use crate::dependence::mac;
use crate::error::Result;

/// Monte-Carlo variance of `W̄_p(t)` under the null for one structure and `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub structure: String,
    pub p: usize,
    pub mac: f64,
    pub t: f64,
    pub variance: f64,
    /// `ρ̄_Σ·e^{−t²/2}`.
    pub scale: f64,
    pub ratio: f64,
}

/// `Var(W̄_p(t))` over `reps` null replicates, with `W̄_p(t) = p⁻¹·#{j: |w_j| > t}`.
pub fn run_variance_check(
    structures: &[StructureSource],
    t_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<VarianceRow>> {
    let mut rows = Vec::new();
    for (k, source) in structures.iter().enumerate() {
        let sigma = source.load()?;
        let p = sigma.p();
        let m = mac(&sigma).value();
        let null = simulate_null_replicates_parametric(&sigma, reps, calibration_seed(seed, k))?;
        for &t in t_grid {
            let fractions: Vec<f64> = (0..null.r())
                .map(|i| null.row(i).iter().filter(|w| w.abs() > t).count() as f64 / p as f64)
                .collect();
            let (_, sd) = mean_sd(&fractions);
            let variance = sd * sd;
            let scale = m * (-0.5 * t * t).exp();
            rows.push(VarianceRow {
                structure: source.to_string(),
                p,
                mac: m,
                t,
                variance,
                scale,
                ratio: variance / scale,
            });
        }
    }
    Ok(rows)
}

/// One row of a MAC / bounding-sequence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacRow {
    pub structure: String,
    pub label: String,
    pub p: usize,
    pub mac: f64,
    pub c_half: f64,
    pub c_one: f64,
}

/// `(ρ̄_Σ, c_{p,1/2}, c_{p,1})` per structure, calibrated on the observed grid
/// with the same seeds as [`run_table_experiment`](super::run_table_experiment).
pub fn run_mac_c_table(
    structures: &[StructureSource],
    reps: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<MacRow>> {
    let specs = [
        BoundingSpec::new(0.5, alpha, GridMode::Observed)?,
        BoundingSpec::new(1.0, alpha, GridMode::Observed)?,
    ];
    structures
        .iter()
        .enumerate()
        .map(|(k, source)| {
            let sigma = source.load()?;
            let null =
                simulate_null_replicates_parametric(&sigma, reps, calibration_seed(seed, k))?;
            let cs = bounding_sequences(&null, &specs)?;
            Ok(MacRow {
                structure: source.to_string(),
                label: sigma.label().to_string(),
                p: sigma.p(),
                mac: mac(&sigma).value(),
                c_half: cs[0].c,
                c_one: cs[1].c,
            })
        })
        .collect()
}
