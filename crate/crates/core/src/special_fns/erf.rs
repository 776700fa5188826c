use std::f64::consts::PI;

use crate::error::{Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Below this argument `exp(x²)·erfc(x)` is formed as a product; above it
/// `erfc` heads into the subnormal range and the asymptotic series takes over.
const PRODUCT_LIMIT: f64 = 25.0;

/// Complementary error function `2/√π ∫_x^∞ exp(-t²) dt`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `exp(x²)` with the rounding error of `x²` folded back in.
fn exp_square(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    hi.exp() * (1.0 + lo)
}

/// `x² + ln erfc(x)` style helper for negative `x`, exact-square split.
fn square_split(x: f64) -> (f64, f64) {
    let hi = x * x;
    (hi, x.mul_add(x, -hi))
}

fn erfcx_asymptotic(x: f64) -> f64 {
    // 1/(x√π) Σ (-1)^k (2k-1)!! / (2x²)^k, stopped at the first negligible term
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= -((2 * k - 1) as f64) * inv;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum * FRAC_1_SQRT_PI / x
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Returns [`Error::Overflow`] when the value exceeds `f64::MAX`, which
/// happens for `x` below roughly `-26.6`; use [`ln_erfcx`] there.
pub fn erfcx(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    let v = if x >= PRODUCT_LIMIT {
        erfcx_asymptotic(x)
    } else {
        exp_square(x) * erfc(x)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("erfcx({x}) exceeds the f64 range")))
    }
}

/// `ln(exp(x²)·erfc(x))`, finite for every finite `x`.
pub fn ln_erfcx(x: f64) -> f64 {
    if x >= PRODUCT_LIMIT {
        erfcx_asymptotic(x).ln()
    } else if x >= 0.0 {
        (exp_square(x) * erfc(x)).ln()
    } else {
        // erfc(x) ∈ (1, 2] here, so only the square can be large
        let (hi, lo) = square_split(x);
        hi + lo + erfc(x).ln()
    }
}

/// `1/√π - z·erfcx(z)` for `z ≥ 0` without the cancellation of the direct
/// difference at large `z` (where both terms tend to `1/√π`).
///
/// For `z ≥ 3` this uses the continued fraction
/// `√π·erfcx(z) = 1/(z + K)`, `K = (1/2)/(z + 1/(z + (3/2)/(z + …)))`,
/// giving `K / (√π (z + K))`.
pub fn erfcx_gap(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < 3.0 {
        return FRAC_1_SQRT_PI - z * exp_square(z) * erfc(z);
    }
    let depth = 120;
    let mut t = z;
    for n in (2..=depth).rev() {
        t = z + (0.5 * n as f64) / t;
    }
    let k = 0.5 / t;
    k / ((z + k) * PI.sqrt())
}
