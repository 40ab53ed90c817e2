//! The `π̂_δ` family, its discretised form and the adaptive estimator.

mod report;
mod zscores;

pub use report::{estimate_pipeline, estimate_report, Argmax, EstimateReport, SignalCounts};
pub use zscores::{inverse_normal_transform, NullDistribution, ZScores};

use serde::{Deserialize, Serialize};

use crate::calibration::{integer_grid, BoundingSequence, ExceedanceProfile, GridMode, GridPoint};
use crate::error::{Error, Result};
use crate::numerics::special::normal_sf;

/// Observed thresholds at or below this are skipped (the denominator
/// `1 − 2Φ̄(t)` vanishes at zero).
pub const MIN_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Delta,
    Discrete,
    Adaptive,
    Gw,
    Jc,
}

/// One proportion estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub method: Method,
    /// Exponent of the bounding function; for the adaptive estimator, the
    /// exponent of the component that attained the maximum.
    pub theta: Option<f64>,
    pub pi_hat: f64,
    pub c_used: Vec<f64>,
    /// Threshold at which the supremum was attained.
    pub argmax_t: Option<f64>,
    /// The unclamped supremum lay outside `[0, 1]`.
    pub clamped: bool,
}

impl EstimateResult {
    pub(crate) fn from_raw(method: Method, theta: Option<f64>, c_used: Vec<f64>, sup: Sup) -> Self {
        Self {
            method,
            theta,
            pi_hat: sup.value.clamp(0.0, 1.0),
            c_used,
            argmax_t: sup.argmax,
            clamped: !(0.0..=1.0).contains(&sup.value),
        }
    }
}

/// Running supremum with the point that attained it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Sup {
    pub value: f64,
    pub argmax: Option<f64>,
}

impl Sup {
    pub fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            argmax: None,
        }
    }

    pub fn offer(&mut self, value: f64, t: f64) {
        if value > self.value {
            self.value = value;
            self.argmax = Some(t);
        }
    }
}

/// `(count/p − 2Φ̄(t) − c·Φ̄(t)^θ) / (1 − 2Φ̄(t))`.
fn objective(count: usize, p: usize, sf: f64, c: f64, theta: f64) -> f64 {
    let bound = if theta == 0.0 { 1.0 } else { sf.powf(theta) };
    (count as f64 / p as f64 - 2.0 * sf - c * bound) / (1.0 - 2.0 * sf)
}

fn sup_over(points: impl Iterator<Item = GridPoint>, p: usize, c: f64, theta: f64) -> Sup {
    let mut sup = Sup::new();
    for g in points {
        let sf = normal_sf(g.t);
        sup.offer(objective(g.above, p, sf, c, theta), g.t);
        if g.at_or_above != g.above {
            sup.offer(objective(g.at_or_above, p, sf, c, theta), g.t);
        }
    }
    sup
}

fn check_sequence(z: &ZScores, c: &BoundingSequence) -> Result<()> {
    if c.p != z.p() {
        return Err(Error::DimensionMismatch {
            expected: c.p,
            found: z.p(),
        });
    }
    if !(c.c >= 0.0 && c.c.is_finite()) {
        return Err(Error::domain(format!(
            "bounding constant c = {} must be finite and >= 0",
            c.c
        )));
    }
    c.spec().validate()
}

fn sup_for(prof: &ExceedanceProfile, c: &BoundingSequence) -> Result<Sup> {
    let p = prof.p();
    Ok(match c.grid {
        GridMode::Observed => sup_over(
            prof.observed_points(MIN_THRESHOLD, f64::INFINITY),
            p,
            c.c,
            c.theta,
        ),
        GridMode::Integer => {
            let grid = integer_grid(p);
            if grid.is_empty() {
                return Err(Error::domain(format!("integer grid is empty for p = {p}")));
            }
            sup_over(prof.integer_points(&grid), p, c.c, c.theta)
        }
    })
}

fn method_for(grid: GridMode) -> Method {
    match grid {
        GridMode::Observed => Method::Delta,
        GridMode::Integer => Method::Discrete,
    }
}

/// Estimates for several bounding sequences from a single sort of `|z|`.
/// Each sequence is evaluated on its own grid.
pub fn pi_hat_family(z: &ZScores, cs: &[&BoundingSequence]) -> Result<Vec<EstimateResult>> {
    for c in cs {
        check_sequence(z, c)?;
    }
    let prof = ExceedanceProfile::new(z.values())?;
    cs.iter()
        .map(|c| {
            let sup = sup_for(&prof, c)?;
            Ok(EstimateResult::from_raw(
                method_for(c.grid),
                Some(c.theta),
                vec![c.c],
                sup,
            ))
        })
        .collect()
}

/// `π̂_δ` with the supremum over the observed thresholds `|z_j| > 0`.
pub fn pi_hat_delta(z: &ZScores, c: &BoundingSequence) -> Result<EstimateResult> {
    if c.grid != GridMode::Observed {
        return Err(Error::domain(
            "pi_hat_delta needs a bounding sequence on the observed grid",
        ));
    }
    Ok(pi_hat_family(z, &[c])?.remove(0))
}

/// `π̂*_δ` with the supremum over `{1, …, ⌊√(5 ln p)⌋}`.
pub fn pi_hat_delta_discrete(z: &ZScores, c_star: &BoundingSequence) -> Result<EstimateResult> {
    if c_star.grid != GridMode::Integer {
        return Err(Error::domain(
            "pi_hat_delta_discrete needs a bounding sequence on the integer grid",
        ));
    }
    Ok(pi_hat_family(z, &[c_star])?.remove(0))
}

/// Combines the `θ = 1/2` and `θ = 1` estimates into `π̂_adap`.
pub fn adaptive_from(half: &EstimateResult, one: &EstimateResult) -> EstimateResult {
    let winner = if half.pi_hat >= one.pi_hat { half } else { one };
    EstimateResult {
        method: Method::Adaptive,
        theta: winner.theta,
        pi_hat: half.pi_hat.max(one.pi_hat),
        c_used: half.c_used.iter().chain(&one.c_used).copied().collect(),
        argmax_t: winner.argmax_t,
        clamped: below_zero(half) && below_zero(one) || above_one(half) || above_one(one),
    }
}

fn below_zero(r: &EstimateResult) -> bool {
    r.clamped && r.pi_hat == 0.0
}

fn above_one(r: &EstimateResult) -> bool {
    r.clamped && r.pi_hat == 1.0
}

pub(crate) fn check_adaptive_pair(
    c_half: &BoundingSequence,
    c_one: &BoundingSequence,
) -> Result<()> {
    if c_half.theta != 0.5 || c_one.theta != 1.0 {
        return Err(Error::domain(format!(
            "adaptive estimator needs theta = 0.5 and 1 (got {} and {})",
            c_half.theta, c_one.theta
        )));
    }
    if c_half.grid != c_one.grid {
        return Err(Error::domain(format!(
            "bounding sequences use different grids ({} and {})",
            c_half.grid, c_one.grid
        )));
    }
    if c_half.alpha != c_one.alpha {
        return Err(Error::domain(format!(
            "bounding sequences use different alpha ({} and {})",
            c_half.alpha, c_one.alpha
        )));
    }
    Ok(())
}

/// `π̂_adap = max(π̂_{1/2}, π̂_1)`.
pub fn pi_hat_adaptive(
    z: &ZScores,
    c_half: &BoundingSequence,
    c_one: &BoundingSequence,
) -> Result<EstimateResult> {
    check_adaptive_pair(c_half, c_one)?;
    let r = pi_hat_family(z, &[c_half, c_one])?;
    Ok(adaptive_from(&r[0], &r[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::BoundingSpec;
    use crate::numerics::{std_normal_isf, RngStream};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn seq(c: f64, theta: f64, grid: GridMode, p: usize) -> BoundingSequence {
        BoundingSequence::fixed(c, BoundingSpec::new(theta, 0.1, grid).unwrap(), p)
    }

    // Φ̄ via the series / continued fraction pair, independent of the library.
    fn sf_oracle(t: f64) -> f64 {
        let x = t / std::f64::consts::SQRT_2;
        if x < 2.5 {
            let (mut term, mut sum) = (x, x);
            for n in 1..200 {
                term *= 2.0 * x * x / (2 * n + 1) as f64;
                sum += term;
            }
            return 0.5 * (1.0 - 2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum);
        }
        let mut f = x;
        for k in (1..400).rev() {
            f = x + (k as f64 / 2.0) / f;
        }
        0.5 * (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }

    // Direct O(p²) evaluation: every candidate threshold, both one-sided limits.
    fn naive(z: &[f64], c: f64, theta: f64, grid: Option<&[f64]>) -> f64 {
        let p = z.len() as f64;
        let ts: Vec<f64> = match grid {
            Some(g) => g.to_vec(),
            None => z.iter().map(|v| v.abs()).filter(|&t| t > 1e-8).collect(),
        };
        let mut best = f64::NEG_INFINITY;
        for &t in &ts {
            let s = sf_oracle(t);
            let gt = z.iter().filter(|v| v.abs() > t).count() as f64 / p;
            let ge = z.iter().filter(|v| v.abs() >= t).count() as f64 / p;
            let counts = if grid.is_some() {
                vec![gt]
            } else {
                vec![gt, ge]
            };
            for f in counts {
                best = best.max((f - 2.0 * s - c * s.powf(theta)) / (1.0 - 2.0 * s));
            }
        }
        best.clamp(0.0, 1.0)
    }

    fn random_z(p: usize, seed: u64, signal: f64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 3).generator();
        (0..p)
            .map(|j| rng.sample::<f64, _>(StandardNormal) + if j % 10 == 0 { signal } else { 0.0 })
            .collect()
    }

    #[test]
    fn null_quantiles_with_large_c_give_zero() {
        let p = 500;
        let z: Vec<f64> = (1..=p)
            .map(|j| std_normal_isf(j as f64 / (p + 1) as f64).unwrap())
            .collect();
        let r = pi_hat_delta(
            &ZScores::new(z).unwrap(),
            &seq(10.0, 0.5, GridMode::Observed, p),
        )
        .unwrap();
        assert_eq!(r.pi_hat, 0.0);
        assert!(r.clamped);
    }

    #[test]
    fn four_point_hand_evaluation() {
        let z = [0.5, 1.5, 2.5, 3.5];
        let mut expected = f64::NEG_INFINITY;
        for (k, &t) in z.iter().enumerate() {
            let s = sf_oracle(t);
            for frac in [(4 - k) as f64 / 4.0, (3 - k) as f64 / 4.0] {
                expected = expected.max((frac - 2.0 * s - 0.1 * s.sqrt()) / (1.0 - 2.0 * s));
            }
        }
        let r = pi_hat_delta(
            &ZScores::new(z.to_vec()).unwrap(),
            &seq(0.1, 0.5, GridMode::Observed, 4),
        )
        .unwrap();
        assert!((r.pi_hat - expected.clamp(0.0, 1.0)).abs() < 1e-12);
        // left limit at t = 0.5: (1 − 2Φ̄(0.5) − 0.1√Φ̄(0.5)) / (1 − 2Φ̄(0.5))
        let s = sf_oracle(0.5);
        let at = (1.0 - 2.0 * s - 0.1 * s.sqrt()) / (1.0 - 2.0 * s);
        assert!((r.pi_hat - at).abs() < 1e-12, "{} vs {at}", r.pi_hat);
        assert_eq!(r.argmax_t, Some(0.5));
        assert!(!r.clamped);
    }

    #[test]
    fn all_zero_statistics() {
        let z = ZScores::new(vec![0.0; 30]).unwrap();
        let r = pi_hat_delta(&z, &seq(0.5, 0.5, GridMode::Observed, 30)).unwrap();
        assert_eq!((r.pi_hat, r.clamped, r.argmax_t), (0.0, true, None));
        let r = pi_hat_delta_discrete(&z, &seq(0.5, 0.5, GridMode::Integer, 30)).unwrap();
        assert_eq!(r.pi_hat, 0.0);
    }

    #[test]
    fn huge_statistics_still_count() {
        let z = ZScores::new(vec![50.0; 20]).unwrap();
        let r = pi_hat_delta(&z, &seq(1.0, 0.5, GridMode::Observed, 20)).unwrap();
        assert_eq!(r.pi_hat, 1.0);
    }

    #[test]
    fn grid_and_dimension_checks() {
        let z = ZScores::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(pi_hat_delta(&z, &seq(0.1, 0.5, GridMode::Integer, 3)).is_err());
        assert!(pi_hat_delta_discrete(&z, &seq(0.1, 0.5, GridMode::Observed, 3)).is_err());
        assert!(matches!(
            pi_hat_delta(&z, &seq(0.1, 0.5, GridMode::Observed, 4)),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
        let one = ZScores::new(vec![1.0]).unwrap();
        assert!(pi_hat_delta_discrete(&one, &seq(0.1, 0.5, GridMode::Integer, 1)).is_err());
        assert!(pi_hat_adaptive(
            &z,
            &seq(0.1, 0.5, GridMode::Observed, 3),
            &seq(0.1, 1.0, GridMode::Integer, 3)
        )
        .is_err());
        assert!(pi_hat_adaptive(
            &z,
            &seq(0.1, 1.0, GridMode::Observed, 3),
            &seq(0.1, 0.5, GridMode::Observed, 3)
        )
        .is_err());
    }

    #[test]
    fn oracle_equivalence_random_instances() {
        for inst in 0..50u64 {
            let p = 20 + (inst as usize * 37) % 181;
            let z = random_z(p, inst, if inst % 2 == 0 { 3.0 } else { 0.0 });
            let zs = ZScores::new(z.clone()).unwrap();
            for theta in [0.0, 0.5, 1.0] {
                let c = 0.05 * (inst % 7) as f64;
                let r = pi_hat_delta(&zs, &seq(c, theta, GridMode::Observed, p)).unwrap();
                assert!(
                    (r.pi_hat - naive(&z, c, theta, None)).abs() < 1e-12,
                    "{inst} {theta}"
                );
                let g = integer_grid(p);
                let r = pi_hat_delta_discrete(&zs, &seq(c, theta, GridMode::Integer, p)).unwrap();
                assert!((r.pi_hat - naive(&z, c, theta, Some(&g))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn discrete_never_exceeds_observed() {
        for inst in 0..50u64 {
            let p = 100 + inst as usize;
            let zs = ZScores::new(random_z(p, 100 + inst, 2.5)).unwrap();
            for theta in [0.5, 1.0] {
                let c = 0.3;
                let d = pi_hat_delta_discrete(&zs, &seq(c, theta, GridMode::Integer, p)).unwrap();
                let o = pi_hat_delta(&zs, &seq(c, theta, GridMode::Observed, p)).unwrap();
                assert!(d.pi_hat <= o.pi_hat + 1e-15);
            }
        }
    }

    #[test]
    fn adaptive_is_exact_max() {
        for seed in 0..20 {
            let zs = ZScores::new(random_z(300, seed, 3.0)).unwrap();
            let h = seq(0.4, 0.5, GridMode::Observed, 300);
            let o = seq(3.0, 1.0, GridMode::Observed, 300);
            let a = pi_hat_adaptive(&zs, &h, &o).unwrap();
            let ph = pi_hat_delta(&zs, &h).unwrap().pi_hat;
            let po = pi_hat_delta(&zs, &o).unwrap().pi_hat;
            assert_eq!(a.pi_hat, ph.max(po));
            assert_eq!(a.method, Method::Adaptive);
            assert_eq!(a.c_used, vec![0.4, 3.0]);
        }
        let zero = ZScores::new(vec![0.0; 10]).unwrap();
        let a = pi_hat_adaptive(
            &zero,
            &seq(0.4, 0.5, GridMode::Observed, 10),
            &seq(3.0, 1.0, GridMode::Observed, 10),
        )
        .unwrap();
        assert_eq!(a.pi_hat, 0.0);
    }

    proptest! {
        #[test]
        fn bounded_and_flag_consistent(
            z in prop::collection::vec(-8.0f64..8.0, 1..80),
            c in 0.0f64..5.0,
            theta in 0.0f64..=1.0,
        ) {
            let p = z.len();
            let r = pi_hat_delta(&ZScores::new(z.clone()).unwrap(), &seq(c, theta, GridMode::Observed, p)).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.pi_hat));
            let raw = {
                let ts: Vec<f64> = z.iter().map(|v| v.abs()).filter(|&t| t > 1e-8).collect();
                if ts.is_empty() { f64::NEG_INFINITY } else { naive_raw(&z, c, theta) }
            };
            prop_assert_eq!(r.clamped, !(0.0..=1.0).contains(&raw));
        }

        #[test]
        fn non_increasing_in_c(
            z in prop::collection::vec(-6.0f64..6.0, 1..80),
            c1 in 0.0f64..3.0,
            dc in 0.0f64..3.0,
            theta in 0.0f64..=1.0,
            integer in any::<bool>(),
        ) {
            let p = z.len();
            let grid = if integer && p >= 2 { GridMode::Integer } else { GridMode::Observed };
            let zs = ZScores::new(z).unwrap();
            let a = pi_hat_family(&zs, &[&seq(c1, theta, grid, p)]).unwrap()[0].pi_hat;
            let b = pi_hat_family(&zs, &[&seq(c1 + dc, theta, grid, p)]).unwrap()[0].pi_hat;
            prop_assert!(b <= a);
        }

        #[test]
        fn permutation_and_sign_invariance(
            z in prop::collection::vec(-6.0f64..6.0, 2..80),
            seed in 0u64..1000,
            flips in prop::collection::vec(any::<bool>(), 80),
        ) {
            use rand::seq::SliceRandom;
            let p = z.len();
            let mut q: Vec<f64> = z.iter().zip(&flips).map(|(v, &f)| if f { -v } else { *v }).collect();
            q.shuffle(&mut RngStream::new(seed, 0).generator());
            let (a, b) = (ZScores::new(z).unwrap(), ZScores::new(q).unwrap());
            for grid in [GridMode::Observed, GridMode::Integer] {
                for theta in [0.5, 1.0] {
                    let c = seq(0.2, theta, grid, p);
                    prop_assert_eq!(pi_hat_family(&a, &[&c]).unwrap(), pi_hat_family(&b, &[&c]).unwrap());
                }
            }
        }
    }

    fn naive_raw(z: &[f64], c: f64, theta: f64) -> f64 {
        let p = z.len() as f64;
        let mut best = f64::NEG_INFINITY;
        for t in z.iter().map(|v| v.abs()).filter(|&t| t > 1e-8) {
            let s = sf_oracle(t);
            for f in [
                z.iter().filter(|v| v.abs() > t).count() as f64 / p,
                z.iter().filter(|v| v.abs() >= t).count() as f64 / p,
            ] {
                best = best.max((f - 2.0 * s - c * s.powf(theta)) / (1.0 - 2.0 * s));
            }
        }
        best
    }
}
