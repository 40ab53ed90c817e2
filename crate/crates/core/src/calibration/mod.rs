//! Null replicates, the `V` statistic and calibrated bounding sequences.

mod profile;
mod replicates;

pub use profile::{integer_grid, ExceedanceProfile, GridPoint, MAX_THRESHOLD};
pub use replicates::{
    load_null_replicates, marginal_z_scores, permutation_null_replicates, save_null_replicates,
    simulate_null_replicates_parametric, MarginalRegression, NullReplicates, Provenance,
};

pub(crate) use profile::normalized_deviation;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_REPS: usize = 1000;

/// Threshold grid on which the supremum over `t > 0` is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    /// The observed absolute statistics.
    Observed,
    /// `{1, …, ⌊√(5 ln p)⌋}`.
    Integer,
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Observed => "observed",
            Self::Integer => "integer",
        })
    }
}

impl FromStr for GridMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "observed" => Ok(Self::Observed),
            "integer" => Ok(Self::Integer),
            other => Err(Error::spec(other, "grid must be one of observed, integer")),
        }
    }
}

/// Bounding function `δ(t) = Φ̄(t)^θ`, control level and grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingSpec {
    pub theta: f64,
    pub alpha: f64,
    pub grid: GridMode,
}

impl BoundingSpec {
    pub fn new(theta: f64, alpha: f64, grid: GridMode) -> Result<Self> {
        let spec = Self { theta, alpha, grid };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain(format!(
                "theta = {} must be in [0, 1]",
                self.theta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!(
                "alpha = {} must be in (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Calibrated constant `c` together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingSequence {
    pub c: f64,
    pub theta: f64,
    pub alpha: f64,
    pub grid: GridMode,
    #[serde(rename = "R")]
    pub reps: usize,
    pub p: usize,
    pub seed: Option<u64>,
    pub provenance: Provenance,
}

impl BoundingSequence {
    pub fn spec(&self) -> BoundingSpec {
        BoundingSpec {
            theta: self.theta,
            alpha: self.alpha,
            grid: self.grid,
        }
    }

    /// A sequence with a fixed `c`, for use without calibration.
    pub fn fixed(c: f64, spec: BoundingSpec, p: usize) -> Self {
        Self {
            c,
            theta: spec.theta,
            alpha: spec.alpha,
            grid: spec.grid,
            reps: 0,
            p,
            seed: None,
            provenance: Provenance::Fixed,
        }
    }
}

/// `V = max_t |W̄(t) − 2Φ̄(t)| / Φ̄(t)^θ` over the grid of `spec`.
pub fn v_statistic(w: &[f64], spec: &BoundingSpec) -> Result<f64> {
    spec.validate()?;
    let prof = ExceedanceProfile::new(w)?;
    let grid = grid_for(spec.grid, prof.p())?;
    Ok(v_from_profile(&prof, spec.theta, grid.as_deref()))
}

pub(crate) fn grid_for(mode: GridMode, p: usize) -> Result<Option<Vec<f64>>> {
    match mode {
        GridMode::Observed => Ok(None),
        GridMode::Integer => {
            let g = integer_grid(p);
            if g.is_empty() {
                return Err(Error::domain(format!("integer grid is empty for p = {p}")));
            }
            Ok(Some(g))
        }
    }
}

fn v_from_profile(prof: &ExceedanceProfile, theta: f64, grid: Option<&[f64]>) -> f64 {
    let p = prof.p();
    let eval = |g: GridPoint| {
        let right = normalized_deviation(g.above, p, g.t, theta);
        if g.at_or_above == g.above {
            right
        } else {
            right.max(normalized_deviation(g.at_or_above, p, g.t, theta))
        }
    };
    match grid {
        None => prof
            .observed_points(0.0, MAX_THRESHOLD)
            .map(eval)
            .fold(0.0, f64::max),
        Some(g) => prof.integer_points(g).map(eval).fold(0.0, f64::max),
    }
}

/// `V` for every replicate row.
pub fn null_v_statistics(reps: &NullReplicates, spec: &BoundingSpec) -> Result<Vec<f64>> {
    let mut all = null_v_statistics_multi(reps, std::slice::from_ref(spec))?;
    Ok(all.pop().unwrap_or_default())
}

fn null_v_statistics_multi(reps: &NullReplicates, specs: &[BoundingSpec]) -> Result<Vec<Vec<f64>>> {
    let mut grids = Vec::with_capacity(specs.len());
    for s in specs {
        s.validate()?;
        grids.push(grid_for(s.grid, reps.p())?);
    }
    let per_row: Vec<Vec<f64>> = (0..reps.r())
        .into_par_iter()
        .map(|i| {
            let prof = ExceedanceProfile::new(reps.row(i))?;
            Ok(specs
                .iter()
                .zip(&grids)
                .map(|(s, g)| v_from_profile(&prof, s.theta, g.as_deref()))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..specs.len())
        .map(|k| per_row.iter().map(|row| row[k]).collect())
        .collect())
}

/// Order statistic of rank `⌈(1−α)R⌉`.
pub fn upper_quantile(values: &[f64], alpha: f64) -> f64 {
    let r = values.len();
    assert!(r > 0, "upper_quantile of empty slice");
    let rank = ((1.0 - alpha) * r as f64 - 1e-9)
        .ceil()
        .clamp(1.0, r as f64) as usize;
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted[rank - 1]
}

/// Calibrates `c` as the `(1−α)` quantile of `V` over the replicate rows.
pub fn bounding_sequence(reps: &NullReplicates, spec: &BoundingSpec) -> Result<BoundingSequence> {
    let mut out = bounding_sequences(reps, std::slice::from_ref(spec))?;
    Ok(out.remove(0))
}

/// Several calibrations from one pass over the replicates.
pub fn bounding_sequences(
    reps: &NullReplicates,
    specs: &[BoundingSpec],
) -> Result<Vec<BoundingSequence>> {
    let vs = null_v_statistics_multi(reps, specs)?;
    Ok(specs
        .iter()
        .zip(vs)
        .map(|(s, v)| BoundingSequence {
            c: upper_quantile(&v, s.alpha),
            theta: s.theta,
            alpha: s.alpha,
            grid: s.grid,
            reps: reps.r(),
            p: reps.p(),
            seed: reps.provenance().seed(),
            provenance: reps.provenance().clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, RngStream};
    use proptest::prelude::*;
    use rand::Rng;

    fn obs(theta: f64) -> BoundingSpec {
        BoundingSpec::new(theta, 0.1, GridMode::Observed).unwrap()
    }

    // Φ̄ from an independent series (small t) or continued fraction (large t).
    fn sf_oracle(t: f64) -> f64 {
        let x = t / std::f64::consts::SQRT_2;
        if x < 2.5 {
            // erf(x) = 2/√π e^{−x²} Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))
            let (mut term, mut sum) = (x, x);
            for n in 1..200 {
                term *= 2.0 * x * x / (2 * n + 1) as f64;
                sum += term;
            }
            let erf = 2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum;
            return 0.5 * (1.0 - erf);
        }
        // erfc(x) = e^{−x²}/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + …))))
        let mut f = x;
        for k in (1..400).rev() {
            f = x + (k as f64 / 2.0) / f;
        }
        0.5 * (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }

    fn naive_v(w: &[f64], theta: f64) -> f64 {
        let p = w.len() as f64;
        let mut best = 0.0f64;
        for &t in w.iter().map(|v| v.abs()).collect::<Vec<_>>().iter() {
            if t <= 0.0 {
                continue;
            }
            let gt = w.iter().filter(|v| v.abs() > t).count() as f64 / p;
            let ge = w.iter().filter(|v| v.abs() >= t).count() as f64 / p;
            let s = sf_oracle(t);
            for f in [gt, ge] {
                best = best.max((f - 2.0 * s).abs() / s.powf(theta));
            }
        }
        best
    }

    #[test]
    fn zero_vector_integer_grid() {
        let spec = BoundingSpec::new(0.0, 0.1, GridMode::Integer).unwrap();
        let v = v_statistic(&[0.0; 10], &spec).unwrap();
        assert!((v - 2.0 * sf_oracle(1.0)).abs() < 1e-15);
    }

    #[test]
    fn four_point_hand_evaluation() {
        // left limits at t = 0.5, 1.5, 2.5, 3.5 have W̄ = 1, 3/4, 1/2, 1/4 and
        // right limits have 3/4, 1/2, 1/4, 0
        let w = [0.5, 1.5, 2.5, 3.5];
        let mut expected = 0.0f64;
        for (k, t) in w.iter().enumerate() {
            let s = sf_oracle(*t);
            for frac in [(4 - k) as f64 / 4.0, (3 - k) as f64 / 4.0] {
                expected = expected.max((frac - 2.0 * s).abs() / s.sqrt());
            }
        }
        let got = v_statistic(&w, &obs(0.5)).unwrap();
        assert!(
            (got - expected).abs() < 1e-12 * expected,
            "{got} vs {expected}"
        );
        // attained at t = 3.5 from the left: (1/4 − 2Φ̄(3.5))/√Φ̄(3.5)
        let s = sf_oracle(3.5);
        assert!((got - (0.25 - 2.0 * s) / s.sqrt()).abs() < 1e-12 * got);
    }

    #[test]
    fn errors() {
        assert!(v_statistic(&[], &obs(0.5)).is_err());
        assert!(v_statistic(&[1.0, f64::INFINITY], &obs(0.5)).is_err());
        assert!(BoundingSpec::new(1.5, 0.1, GridMode::Observed).is_err());
        assert!(BoundingSpec::new(0.5, 1.0, GridMode::Observed).is_err());
        let int = BoundingSpec::new(0.5, 0.1, GridMode::Integer).unwrap();
        assert!(v_statistic(&[1.0], &int).is_err());
    }

    #[test]
    fn grid_mode_parsing() {
        assert_eq!("observed".parse::<GridMode>().unwrap(), GridMode::Observed);
        assert_eq!("integer".parse::<GridMode>().unwrap(), GridMode::Integer);
        assert!(matches!("int".parse::<GridMode>(), Err(Error::Spec { .. })));
    }

    #[test]
    fn quantile_rank() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(upper_quantile(&v, 0.1), 900.0);
        assert_eq!(upper_quantile(&v, 1e-9), 1000.0);
        assert_eq!(upper_quantile(&[3.0], 0.7), 3.0);
        assert_eq!(upper_quantile(&[1.0, 2.0, 3.0, 4.0], 0.3), 3.0);
    }

    fn random_reps(r: usize, p: usize, seed: u64) -> NullReplicates {
        let mut rng = RngStream::new(seed, 0).generator();
        let m = Matrix::from_fn(r, p, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        NullReplicates::new(m, Provenance::External { path: "mem".into() }).unwrap()
    }

    #[test]
    fn single_replicate_gives_its_statistic() {
        let reps = random_reps(1, 40, 3);
        for alpha in [0.01, 0.5, 0.99] {
            let spec = BoundingSpec::new(1.0, alpha, GridMode::Observed).unwrap();
            let c = bounding_sequence(&reps, &spec).unwrap();
            assert_eq!(c.c, v_statistic(reps.row(0), &spec).unwrap());
        }
    }

    #[test]
    fn tiny_alpha_gives_maximum() {
        let reps = random_reps(50, 30, 4);
        let spec = BoundingSpec::new(0.5, 1e-6, GridMode::Observed).unwrap();
        let all = null_v_statistics(&reps, &spec).unwrap();
        let max = all.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(bounding_sequence(&reps, &spec).unwrap().c, max);
    }

    #[test]
    fn joint_calibration_matches_individual() {
        let reps = random_reps(60, 50, 5);
        let specs = [
            obs(0.5),
            obs(1.0),
            BoundingSpec::new(0.5, 0.1, GridMode::Integer).unwrap(),
        ];
        let joint = bounding_sequences(&reps, &specs).unwrap();
        for (s, j) in specs.iter().zip(&joint) {
            assert_eq!(bounding_sequence(&reps, s).unwrap(), *j);
        }
    }

    #[test]
    fn sequence_json_fields() {
        let reps = random_reps(5, 8, 6);
        let c = bounding_sequence(&reps, &obs(0.5)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        for key in ["c", "theta", "alpha", "grid", "R", "seed", "provenance"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["grid"], "observed");
        let back: BoundingSequence = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    proptest! {
        #[test]
        fn matches_naive_evaluation(
            w in prop::collection::vec(-6.0f64..6.0, 1..60),
            theta in 0.0f64..=1.0,
        ) {
            let got = v_statistic(&w, &obs(theta)).unwrap();
            let want = naive_v(&w, theta);
            prop_assert!((got - want).abs() <= 1e-10 * want.max(1.0), "{} vs {}", got, want);
        }

        #[test]
        fn ties_are_handled_like_naive(
            base in prop::collection::vec(0u8..8, 1..40),
            theta in 0.0f64..=1.0,
        ) {
            let w: Vec<f64> = base.iter().map(|&k| k as f64 * 0.5).collect();
            let got = v_statistic(&w, &obs(theta)).unwrap();
            let want = naive_v(&w, theta);
            prop_assert!((got - want).abs() <= 1e-10 * want.max(1.0));
        }

        #[test]
        fn duplication_invariance(
            w in prop::collection::vec(-5.0f64..5.0, 2..50),
            theta in 0.0f64..=1.0,
            integer in any::<bool>(),
        ) {
            let grid = if integer { GridMode::Integer } else { GridMode::Observed };
            let spec = BoundingSpec::new(theta, 0.1, grid).unwrap();
            let doubled: Vec<f64> = w.iter().chain(w.iter()).copied().collect();
            let a = v_statistic(&w, &spec).unwrap();
            let b = v_statistic(&doubled, &spec).unwrap();
            if integer {
                // the integer grid depends on p; compare on the smaller grid
                let g = integer_grid(w.len());
                let prof = ExceedanceProfile::new(&doubled).unwrap();
                prop_assert!((a - v_from_profile(&prof, theta, Some(&g))).abs() <= 1e-12 * a.max(1.0));
                prop_assert!(b >= a - 1e-12 * a.max(1.0));
            } else {
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            }
        }

        #[test]
        fn sign_and_order_invariance(
            w in prop::collection::vec(-5.0f64..5.0, 1..50),
            seed in 0u64..100,
        ) {
            use rand::seq::SliceRandom;
            let mut q: Vec<f64> = w.iter().map(|v| -v).collect();
            q.shuffle(&mut RngStream::new(seed, 1).generator());
            prop_assert_eq!(v_statistic(&w, &obs(0.5)).unwrap(), v_statistic(&q, &obs(0.5)).unwrap());
        }

        #[test]
        fn c_non_increasing_in_alpha(seed in 0u64..50, a1 in 0.01f64..0.98, a2 in 0.01f64..0.98) {
            let reps = random_reps(40, 20, seed);
            let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
            let c_lo = bounding_sequence(&reps, &BoundingSpec::new(0.5, lo, GridMode::Observed).unwrap()).unwrap().c;
            let c_hi = bounding_sequence(&reps, &BoundingSpec::new(0.5, hi, GridMode::Observed).unwrap()).unwrap().c;
            prop_assert!(c_lo >= c_hi);
        }
    }
}
