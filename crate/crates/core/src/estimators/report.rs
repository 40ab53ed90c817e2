use serde::{Deserialize, Serialize};

use super::{adaptive_from, check_adaptive_pair, pi_hat_family, NullDistribution, ZScores};
use crate::baselines::{pi_hat_gw, pi_hat_jc, BaselineOptions};
use crate::calibration::{
    bounding_sequences, BoundingSequence, BoundingSpec, GridMode, NullReplicates, Provenance,
};
use crate::error::{Error, Result};

/// Implied numbers of signals, `round(π̂·p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalCounts {
    pub half: u64,
    pub one: u64,
    pub adap: u64,
    pub gw: u64,
    pub jc: u64,
}

/// Thresholds at which each bounding-function estimate attained its supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub half: Option<f64>,
    pub one: Option<f64>,
    pub adap: Option<f64>,
}

/// All estimates for one vector of statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub p: usize,
    pub alpha: f64,
    pub c_half: BoundingSequence,
    pub c_one: BoundingSequence,
    pub pi_half: f64,
    pub pi_one: f64,
    pub pi_adap: f64,
    pub pi_gw: f64,
    pub pi_jc: f64,
    pub counts: SignalCounts,
    pub argmax: Argmax,
    pub transform: NullDistribution,
    pub baselines: BaselineOptions,
    pub seed: Option<u64>,
    pub provenance: Provenance,
}

impl EstimateReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn count(pi: f64, p: usize) -> u64 {
    (pi * p as f64).round() as u64
}

/// Report from already calibrated sequences.
pub fn estimate_report(
    z: &ZScores,
    c_half: &BoundingSequence,
    c_one: &BoundingSequence,
    baselines: &BaselineOptions,
) -> Result<EstimateReport> {
    check_adaptive_pair(c_half, c_one)?;
    if c_half.p != c_one.p {
        return Err(Error::DimensionMismatch {
            expected: c_half.p,
            found: c_one.p,
        });
    }
    let fam = pi_hat_family(z, &[c_half, c_one])?;
    let adap = adaptive_from(&fam[0], &fam[1]);
    let gw = pi_hat_gw(z, baselines.gw_alpha)?;
    let jc = pi_hat_jc(z, baselines.jc_gamma)?;
    let p = z.p();
    Ok(EstimateReport {
        p,
        alpha: c_half.alpha,
        pi_half: fam[0].pi_hat,
        pi_one: fam[1].pi_hat,
        pi_adap: adap.pi_hat,
        pi_gw: gw.pi_hat,
        pi_jc: jc.pi_hat,
        counts: SignalCounts {
            half: count(fam[0].pi_hat, p),
            one: count(fam[1].pi_hat, p),
            adap: count(adap.pi_hat, p),
            gw: count(gw.pi_hat, p),
            jc: count(jc.pi_hat, p),
        },
        argmax: Argmax {
            half: fam[0].argmax_t,
            one: fam[1].argmax_t,
            adap: adap.argmax_t,
        },
        transform: z.transform(),
        baselines: *baselines,
        seed: c_half.seed,
        provenance: c_half.provenance.clone(),
        c_half: c_half.clone(),
        c_one: c_one.clone(),
    })
}

/// Calibrates `c_{p,1/2}` and `c_{p,1}` on the observed grid from `reps`,
/// then computes every estimate.
pub fn estimate_pipeline(z: &ZScores, reps: &NullReplicates, alpha: f64) -> Result<EstimateReport> {
    if reps.p() != z.p() {
        return Err(Error::DimensionMismatch {
            expected: reps.p(),
            found: z.p(),
        });
    }
    let specs = [
        BoundingSpec::new(0.5, alpha, GridMode::Observed)?,
        BoundingSpec::new(1.0, alpha, GridMode::Observed)?,
    ];
    let cs = bounding_sequences(reps, &specs)?;
    estimate_report(z, &cs[0], &cs[1], &BaselineOptions::default())
}
