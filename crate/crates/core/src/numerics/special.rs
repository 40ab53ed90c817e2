//! Normal and Student-t distribution functions.
//!
//! The upper tail `Φ̄(t) = 1 − Φ(t)` is always evaluated through `erfc`
//! so right-tail probabilities keep full relative precision.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Symmetric clamp applied to z-scores whose tail probability is not
/// representable in double precision.
pub const Z_CLAMP: f64 = 38.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * t * t).exp()
}

// Cody's rational Chebyshev approximations for erf/erfc.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_4,
    0.185_777_706_184_603_15,
];
const ERF_B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_13,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_467_3,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Complementary error function with relative accuracy near machine
/// precision wherever the result is a normal float.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.468_75 {
        let ysq = if y > 1.11e-16 { y * y } else { 0.0 };
        let mut num = ERF_A[4] * ysq;
        let mut den = ysq;
        for i in 0..3 {
            num = (num + ERF_A[i]) * ysq;
            den = (den + ERF_B[i]) * ysq;
        }
        return 1.0 - x * (num + ERF_A[3]) / (den + ERF_B[3]);
    }
    let ratio = if y <= 4.0 {
        let mut num = ERFC_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * y;
            den = (den + ERFC_D[i]) * y;
        }
        (num + ERFC_C[7]) / (den + ERFC_D[7])
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = ERFC_P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * ysq;
            den = (den + ERFC_Q[i]) * ysq;
        }
        (FRAC_1_SQRT_PI - ysq * (num + ERFC_P[4]) / (den + ERFC_Q[4])) / y
    };
    // exp(−y²) split as exp(−s²)·exp(−(y−s)(y+s))
    let s = (y * 16.0).trunc() / 16.0;
    let del = (y - s) * (y + s);
    let result = (-s * s).exp() * (-del).exp() * ratio;
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Upper tail `Φ̄(t)`, unchecked.
#[inline]
pub(crate) fn normal_sf(t: f64) -> f64 {
    0.5 * erfc(t * FRAC_1_SQRT_2)
}

/// Upper tail probability `Φ̄(t) = P(Z > t)` of a standard normal.
pub fn std_normal_sf(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::domain(format!(
            "std_normal_sf: non-finite argument {t}"
        )));
    }
    Ok(normal_sf(t))
}

/// Standard normal CDF `Φ(t)`.
pub fn std_normal_cdf(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::domain(format!(
            "std_normal_cdf: non-finite argument {t}"
        )));
    }
    Ok(normal_sf(-t))
}

/// `ln Φ̄(t)`, finite for every finite `t` including tails where `Φ̄(t)`
/// underflows.
pub fn log_std_normal_sf(t: f64) -> f64 {
    if t < 37.0 {
        return normal_sf(t).ln();
    }
    // Asymptotic expansion: Φ̄(t) = φ(t)/t · (1 − 1/t² + 3/t⁴ − 15/t⁶ + 105/t⁸ − …)
    let x2 = 1.0 / (t * t);
    let series = 1.0 - x2 * (1.0 - 3.0 * x2 * (1.0 - 5.0 * x2 * (1.0 - 7.0 * x2)));
    -0.5 * t * t - LN_SQRT_2PI - t.ln() + series.ln()
}

/// Upper-tail quantile: returns `x` with `Φ̄(x) = q`.
pub fn std_normal_isf(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!(
            "std_normal_isf: {q} is not in (0, 1)"
        )));
    }
    Ok(isf_unchecked(q))
}

fn isf_unchecked(q: f64) -> f64 {
    if q > 0.5 {
        return -isf_unchecked(1.0 - q);
    }
    if q == 0.5 {
        return 0.0;
    }
    let mut x = SQRT_2 * erfc_inv(2.0 * q);
    // Halley refinement against the erfc-based tail.
    for _ in 0..2 {
        let dens = std_normal_pdf(x);
        if dens == 0.0 {
            break;
        }
        let r = (normal_sf(x) - q) / dens;
        x += r / (1.0 - 0.5 * x * r);
    }
    x
}

/// Standard normal quantile `Φ⁻¹(u)`.
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "std_normal_quantile: {u} is not in (0, 1)"
        )));
    }
    Ok(if u < 0.5 {
        -isf_unchecked(u)
    } else {
        isf_unchecked(1.0 - u)
    })
}

/// `P(T > |x|)` for Student-t with `df` degrees of freedom.
pub(crate) fn student_t_tail(x: f64, df: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let x2 = x * x;
    // I_{df/(df+x²)}(df/2, 1/2) / 2
    let w = df / (df + x2);
    if w <= 0.0 {
        return 0.0;
    }
    0.5 * beta_reg(0.5 * df, 0.5, w)
}

/// Student-t CDF with `df ≥ 1` degrees of freedom.
pub fn student_t_cdf(x: f64, df: u32) -> Result<f64> {
    if df < 1 {
        return Err(Error::domain("student_t_cdf: df must be at least 1"));
    }
    if x.is_nan() {
        return Err(Error::domain("student_t_cdf: NaN argument"));
    }
    let tail = student_t_tail(x, df as f64);
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

/// Maps a Student-t statistic to the normal score with the same tail
/// probability, using whichever tail is smaller. Returns the score and
/// whether it had to be clamped.
pub(crate) fn student_t_to_z(x: f64, df: f64) -> (f64, bool) {
    if x == 0.0 {
        return (0.0, false);
    }
    let tail = student_t_tail(x.abs(), df);
    let (mag, clamped) = tail_to_z(tail);
    (mag.copysign(x), clamped)
}

/// Normal score `x ≥ 0` with `Φ̄(x) = tail` for `tail ≤ 1/2`, clamped to
/// `Z_CLAMP` when the tail underflows.
pub(crate) fn tail_to_z(tail: f64) -> (f64, bool) {
    if tail >= 0.5 {
        return (0.0, false);
    }
    if tail <= 0.0 || !tail.is_normal() {
        return (Z_CLAMP, true);
    }
    let x = isf_unchecked(tail);
    if x > Z_CLAMP {
        (Z_CLAMP, true)
    } else {
        (x, false)
    }
}
