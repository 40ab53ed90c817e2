use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EstimatorName, ExperimentConfig};
use crate::baselines::{pi_hat_gw, pi_hat_jc, BaselineOptions};
use crate::calibration::{
    bounding_sequences, simulate_null_replicates_parametric, BoundingSequence, BoundingSpec,
    GridMode,
};
use crate::dependence::{mac, CorrelationMatrix};
use crate::error::Result;
use crate::estimators::{adaptive_from, pi_hat_family, ZScores};
use crate::numerics::{cholesky, mix_seed, RngStream};

const CALIBRATION_TAG: u64 = 0x6361_6c69_6200;
const SIMULATION_TAG: u64 = 0x7369_6d75_6c00;

/// Seed of the calibration replicates for the `k`-th structure.
pub fn calibration_seed(seed: u64, k: usize) -> u64 {
    mix_seed(seed, CALIBRATION_TAG + k as u64)
}

fn simulation_seed(seed: u64, k: usize) -> u64 {
    mix_seed(seed, SIMULATION_TAG + k as u64)
}

/// Calibrated sequences for one structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub structure: String,
    pub label: String,
    pub p: usize,
    pub mac: f64,
    pub c_half: Option<BoundingSequence>,
    pub c_one: Option<BoundingSequence>,
    pub c_half_star: Option<BoundingSequence>,
    pub c_one_star: Option<BoundingSequence>,
}

/// Replicate estimates for one (structure, π, μ, estimator) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub structure: String,
    pub pi: f64,
    pub mu: f64,
    pub estimator: EstimatorName,
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub structures: Vec<StructureSummary>,
    pub cells: Vec<Cell>,
}

impl ExperimentResult {
    pub fn cell(&self, structure: usize, pi: f64, mu: f64, est: EstimatorName) -> Option<&Cell> {
        let name = &self.structures.get(structure)?.structure;
        self.cells
            .iter()
            .find(|c| &c.structure == name && c.pi == pi && c.mu == mu && c.estimator == est)
    }
}

/// Mean and sample standard deviation (`n − 1`; zero for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Bounding sequences required by `estimators`, calibrated once per structure.
pub(crate) struct Calibrated {
    half: Option<BoundingSequence>,
    one: Option<BoundingSequence>,
    half_star: Option<BoundingSequence>,
    one_star: Option<BoundingSequence>,
}

pub(crate) fn calibrate(
    sigma: &CorrelationMatrix<f64>,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Calibrated> {
    let want_obs = cfg.estimators.iter().any(|e| e.uses_observed());
    let want_int = cfg.estimators.iter().any(|e| e.uses_integer());
    let mut specs = Vec::new();
    let alpha = cfg.calibration.alpha;
    if want_obs {
        specs.push(BoundingSpec::new(0.5, alpha, cfg.calibration.grid)?);
        specs.push(BoundingSpec::new(1.0, alpha, cfg.calibration.grid)?);
    }
    if want_int {
        specs.push(BoundingSpec::new(0.5, alpha, GridMode::Integer)?);
        specs.push(BoundingSpec::new(1.0, alpha, GridMode::Integer)?);
    }
    let mut out = Calibrated {
        half: None,
        one: None,
        half_star: None,
        one_star: None,
    };
    if specs.is_empty() {
        return Ok(out);
    }
    let reps = simulate_null_replicates_parametric(sigma, cfg.calibration.reps, seed)?;
    let mut cs = bounding_sequences(&reps, &specs)?.into_iter();
    if want_obs {
        out.half = cs.next();
        out.one = cs.next();
    }
    if want_int {
        out.half_star = cs.next();
        out.one_star = cs.next();
    }
    Ok(out)
}

pub(crate) fn estimate_all(
    z: &ZScores,
    estimators: &[EstimatorName],
    cal: &Calibrated,
    baselines: &BaselineOptions,
) -> Result<Vec<f64>> {
    let mut seqs: Vec<&BoundingSequence> = Vec::new();
    if let (Some(h), Some(o)) = (&cal.half, &cal.one) {
        seqs.push(h);
        seqs.push(o);
    }
    if let (Some(h), Some(o)) = (&cal.half_star, &cal.one_star) {
        seqs.push(h);
        seqs.push(o);
    }
    let fam = pi_hat_family(z, &seqs)?;
    let star = if cal.half.is_some() { 2 } else { 0 };
    estimators
        .iter()
        .map(|e| {
            Ok(match e {
                EstimatorName::Half => fam[0].pi_hat,
                EstimatorName::One => fam[1].pi_hat,
                EstimatorName::Adap => adaptive_from(&fam[0], &fam[1]).pi_hat,
                EstimatorName::HalfStar => fam[star].pi_hat,
                EstimatorName::OneStar => fam[star + 1].pi_hat,
                EstimatorName::AdapStar => adaptive_from(&fam[star], &fam[star + 1]).pi_hat,
                EstimatorName::Gw => pi_hat_gw(z, baselines.gw_alpha)?.pi_hat,
                EstimatorName::Jc => pi_hat_jc(z, baselines.jc_gamma)?.pi_hat,
            })
        })
        .collect()
}

/// For every structure: calibrate once, then for each π and replicate draw
/// the signal positions and `Z ~ N_p(μ·1_I, Σ)`. The noise and positions of
/// a replicate are shared by all μ values.
pub fn run_table_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let n = cfg.replications;
    let n_est = cfg.estimators.len();
    let n_mu = cfg.signal.mu.len();
    let mut structures = Vec::new();
    let mut cells = Vec::new();
    for (k, source) in cfg.structures.iter().enumerate() {
        let sigma = source.load()?;
        let p = sigma.p();
        let name = source.to_string();
        let cal = calibrate(&sigma, cfg, calibration_seed(cfg.seed, k))?;
        let factor = cholesky(sigma.entries())?;
        let pis = cfg.signal.proportions(p);
        let sim_seed = simulation_seed(cfg.seed, k);
        let jobs: Vec<(usize, usize)> = (0..pis.len())
            .flat_map(|i| (0..n).map(move |r| (i, r)))
            .collect();
        let results: Vec<Vec<f64>> = jobs
            .par_iter()
            .map_init(
                || (vec![0.0; p], vec![0.0; p]),
                |(g, x), &(i, r)| -> Result<Vec<f64>> {
                    let mut rng = RngStream::new(sim_seed, (i * n + r) as u64).generator();
                    let s = (pis[i] * p as f64).round() as usize;
                    let signals = index::sample(&mut rng, p, s.min(p)).into_vec();
                    for v in g.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    factor.mul_into(g, x);
                    let mut out = Vec::with_capacity(n_mu * n_est);
                    for &mu in &cfg.signal.mu {
                        let mut z = x.clone();
                        for &j in &signals {
                            z[j] += mu;
                        }
                        let zs = ZScores::new(z)?;
                        out.extend(estimate_all(&zs, &cfg.estimators, &cal, &cfg.baselines)?);
                    }
                    Ok(out)
                },
            )
            .collect::<Result<_>>()?;
        for (i, &pi) in pis.iter().enumerate() {
            for (m, &mu) in cfg.signal.mu.iter().enumerate() {
                for (e, &est) in cfg.estimators.iter().enumerate() {
                    let values: Vec<f64> =
                        (0..n).map(|r| results[i * n + r][m * n_est + e]).collect();
                    let (mean, sd) = mean_sd(&values);
                    cells.push(Cell {
                        structure: name.clone(),
                        pi,
                        mu,
                        estimator: est,
                        values,
                        mean,
                        sd,
                    });
                }
            }
        }
        structures.push(StructureSummary {
            structure: name,
            label: sigma.label().to_string(),
            p,
            mac: mac(&sigma).value(),
            c_half: cal.half,
            c_one: cal.one,
            c_half_star: cal.half_star,
            c_one_star: cal.one_star,
        });
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        structures,
        cells,
    })
}

/// Fraction of replicates with `π̂ ≥ π` in one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub structure: String,
    pub pi: f64,
    pub mu: f64,
    pub estimator: EstimatorName,
    pub replications: usize,
    pub exceedance: f64,
}

pub fn coverage(res: &ExperimentResult) -> Vec<CoverageRow> {
    res.cells
        .iter()
        .map(|c| CoverageRow {
            structure: c.structure.clone(),
            pi: c.pi,
            mu: c.mu,
            estimator: c.estimator,
            replications: c.values.len(),
            exceedance: c.values.iter().filter(|&&v| v >= c.pi).count() as f64
                / c.values.len() as f64,
        })
        .collect()
}

/// Runs the experiment and reports how often each estimator reaches `π`.
pub fn run_coverage_experiment(cfg: &ExperimentConfig) -> Result<Vec<CoverageRow>> {
    Ok(coverage(&run_table_experiment(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::super::config::{CalibrationConfig, SignalGrid, StructureSource};
    use super::*;
    use crate::baselines::BaselineOptions;

    fn small(seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            structures: vec![
                StructureSource::Generated("ar:p=100,r=0.5".parse().unwrap()),
                StructureSource::Generated("equal:p=100,rho=0.3".parse().unwrap()),
            ],
            signal: SignalGrid {
                pi: vec![0.1],
                gamma: vec![],
                mu: vec![0.0, 4.0],
            },
            replications: 6,
            calibration: CalibrationConfig {
                reps: 100,
                alpha: 0.1,
                grid: GridMode::Observed,
            },
            estimators: EstimatorName::ALL.to_vec(),
            baselines: BaselineOptions::default(),
            seed,
        }
    }

    #[test]
    fn cells_and_adaptive_identity() {
        let cfg = small(1);
        let res = run_table_experiment(&cfg).unwrap();
        assert_eq!(res.cells.len(), 2 * 2 * EstimatorName::ALL.len());
        for s in 0..2 {
            for mu in [0.0, 4.0] {
                let get = |e| res.cell(s, 0.1, mu, e).unwrap();
                for r in 0..6 {
                    let h = get(EstimatorName::Half).values[r];
                    let o = get(EstimatorName::One).values[r];
                    assert_eq!(get(EstimatorName::Adap).values[r], h.max(o));
                    let hs = get(EstimatorName::HalfStar).values[r];
                    let os = get(EstimatorName::OneStar).values[r];
                    assert_eq!(get(EstimatorName::AdapStar).values[r], hs.max(os));
                }
            }
        }
        for c in &res.cells {
            let (m, sd) = mean_sd(&c.values);
            assert_eq!((m, sd), (c.mean, c.sd));
            assert!(c.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert!(res.structures[0].c_half.is_some() && res.structures[0].c_one_star.is_some());
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let cfg = small(9);
        let a = run_table_experiment(&cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_table_experiment(&cfg).unwrap());
        assert_eq!(a, b);
        let c = run_table_experiment(&small(10)).unwrap();
        assert_ne!(a.cells, c.cells);
    }

    #[test]
    fn single_replicate_has_zero_sd() {
        let mut cfg = small(2);
        cfg.replications = 1;
        cfg.estimators = vec![EstimatorName::Adap];
        let res = run_table_experiment(&cfg).unwrap();
        assert!(res.cells.iter().all(|c| c.sd == 0.0));
    }

    #[test]
    fn zero_signal_mean_stays_small() {
        let mut cfg = small(3);
        cfg.replications = 20;
        cfg.estimators = vec![EstimatorName::Adap];
        let res = run_table_experiment(&cfg).unwrap();
        for s in 0..2 {
            let c = res.cell(s, 0.1, 0.0, EstimatorName::Adap).unwrap();
            let positive = c.values.iter().filter(|&&v| v > 0.0).count();
            assert!(positive <= 4, "{:?}", c.values);
            assert!(c.mean <= 0.05, "{:?}", c.values);
        }
    }

    #[test]
    fn coverage_rates() {
        let mut cfg = small(4);
        cfg.estimators = vec![EstimatorName::Adap];
        let rows = run_coverage_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.exceedance)));
        let mut bad = small(4);
        bad.signal.pi = vec![0.0];
        assert!(run_coverage_experiment(&bad).is_err());
    }

    #[test]
    fn mean_sd_basics() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
