//! Exceedance counts `#{j : |x_j| > t}` evaluated on threshold grids.

use crate::error::{Error, Result};
use crate::numerics::special::{log_std_normal_sf, normal_sf};

/// Thresholds above this are dropped from the observed grid of `V`.
pub const MAX_THRESHOLD: f64 = 40.0;

/// Grid point with the exceedance counts on either side of the threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub t: f64,
    /// `#{j : |x_j| > t}` (right limit)
    pub above: usize,
    /// `#{j : |x_j| ≥ t}` (left limit)
    pub at_or_above: usize,
}

/// Absolute values sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct ExceedanceProfile {
    sorted_abs: Vec<f64>,
}

impl ExceedanceProfile {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empty statistic vector"));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "statistic {j} is not finite ({})",
                values[j]
            )));
        }
        let mut sorted_abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        sorted_abs.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(Self { sorted_abs })
    }

    pub fn p(&self) -> usize {
        self.sorted_abs.len()
    }

    /// `#{j : |x_j| > t}`.
    pub fn count_above(&self, t: f64) -> usize {
        self.sorted_abs.partition_point(|&v| v > t)
    }

    /// One point per distinct observed `|x_j|` in `(min_t, max_t]`.
    pub fn observed_points(&self, min_t: f64, max_t: f64) -> impl Iterator<Item = GridPoint> + '_ {
        let s = &self.sorted_abs;
        let mut i = 0;
        std::iter::from_fn(move || {
            while i < s.len() {
                let t = s[i];
                let mut j = i + 1;
                while j < s.len() && s[j] == t {
                    j += 1;
                }
                let point = GridPoint {
                    t,
                    above: i,
                    at_or_above: j,
                };
                i = j;
                if t > min_t && t <= max_t {
                    return Some(point);
                }
                if t <= min_t {
                    i = s.len();
                }
            }
            None
        })
    }

    /// Points of the integer grid, with strict exceedance counts on both sides.
    pub fn integer_points<'a>(&'a self, grid: &'a [f64]) -> impl Iterator<Item = GridPoint> + 'a {
        grid.iter().map(|&t| {
            let c = self.count_above(t);
            GridPoint {
                t,
                above: c,
                at_or_above: c,
            }
        })
    }
}

/// `𝕋 = {1, …, ⌊√(5 ln p)⌋}`.
pub fn integer_grid(p: usize) -> Vec<f64> {
    let top = (5.0 * (p as f64).ln()).sqrt().floor();
    if !(top >= 1.0) {
        return Vec::new();
    }
    (1..=top as usize).map(|t| t as f64).collect()
}

/// `|count/p − 2Φ̄(t)| / Φ̄(t)^θ`, in log space once `Φ̄(t)` nears underflow.
pub(crate) fn normalized_deviation(count: usize, p: usize, t: f64, theta: f64) -> f64 {
    let frac = count as f64 / p as f64;
    let sf = normal_sf(t);
    if sf >= 1e-300 {
        return (frac - 2.0 * sf).abs() / sf.powf(theta);
    }
    let log_sf = log_std_normal_sf(t);
    let v = if count > 0 {
        // 2Φ̄(t) is negligible next to count/p here
        (frac.ln() - theta * log_sf).exp()
    } else {
        (std::f64::consts::LN_2 + (1.0 - theta) * log_sf).exp()
    };
    v.min(f64::MAX)
}
