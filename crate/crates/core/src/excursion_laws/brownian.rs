//! Closed forms for the Brownian model with drift `-c`, `0 < c < 1`.
//!
//! Every `e^{a²v}·erfc(a√v)` product is formed through `erfcx`.

use crate::error::{Error, Result};
use crate::special_fns::erf::{erfcx, erfcx_gap};

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Brownian densities need 0 < c < 1, got {c}")))
    }
}

fn check_arg(v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("density argument must be finite and >= 0, got {v}")))
    }
}

/// `F(θ, β; k) = 8k / ((s_θ + s_β)(s_θ + 2 - k)(s_β + 2 - k))`,
/// `s_t = √(2t + k²)`. With `k = c` this is the joint transform of the idle
/// period endpoints given `Q₀ = 0`; with `k = 1 - c` that of the busy period
/// endpoints given `Q₀ > 0`.
pub fn endpoint_transform(theta: f64, beta: f64, k: f64) -> f64 {
    let st = (2.0 * theta + k * k).sqrt();
    let sb = (2.0 * beta + k * k).sqrt();
    8.0 * k / ((st + sb) * (st + 2.0 - k) * (sb + 2.0 - k))
}

/// `E[e^{-θ(g(1) - d(0))} | Q₀ > 0]`, the diagonal of [`endpoint_transform`]
/// with `k = 1 - c`.
pub fn busy_length_transform(theta: f64, c: f64) -> f64 {
    let k = 1.0 - c;
    let s = (2.0 * theta + k * k).sqrt();
    4.0 * k / (s * (s + 1.0 + c) * (s + 1.0 + c))
}

/// `E[e^{-θ(d(0) - g(0))} | Q₀ = 0]`.
pub fn idle_length_transform(theta: f64, c: f64) -> f64 {
    let s = (2.0 * theta + c * c).sqrt();
    4.0 * c / (s * (s + 2.0 - c) * (s + 2.0 - c))
}

/// Density of the length of the busy period straddling the origin:
/// `2(1-c) e^{-(1-c)²v/2} (√(2v/π) - (1+c) v e^{(1+c)²v/2} erfc((1+c)√(v/2)))`.
pub fn busy_length_density(v: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_arg(v)?;
    Ok(length_density(v, 1.0 - c))
}

/// Density of the length of the idle period straddling the origin (`c` and
/// `1 - c` exchanged).
pub fn idle_length_density(v: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_arg(v)?;
    Ok(length_density(v, c))
}

// (1+c)v·erfcx(z) = √(2v)·z·erfcx(z) with z = (1+c)√(v/2), so the bracket is
// √(2v)·(1/√π - z·erfcx(z)), evaluated without cancellation.
fn length_density(v: f64, k: f64) -> f64 {
    let z = (2.0 - k) * (0.5 * v).sqrt();
    2.0 * k * (-0.5 * k * k * v).exp() * (2.0 * v).sqrt() * erfcx_gap(z)
}

/// Joint density of `(-d(0), g(1))` given `Q₀ > 0` at `(x, y)`; depends on
/// `x + y` only.
pub fn joint_d0_g1_density(x: f64, y: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_arg(x)?;
    check_arg(y)?;
    let v = x + y;
    if v == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(length_density(v, 1.0 - c) / v)
}

/// Density of `g(1)` given `Q₀ > 0`:
/// `((1-c)/c) e^{-(1-c)²x/2} ((1+c) erfcx((1+c)√(x/2)) - (1-c) erfcx((1-c)√(x/2)))`.
pub fn g1_density(x: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_arg(x)?;
    let s = (0.5 * x).sqrt();
    let (a, b) = (1.0 + c, 1.0 - c);
    Ok(b / c * (-0.5 * b * b * x).exp() * (a * erfcx(a * s)? - b * erfcx(b * s)?))
}

/// Density of `d(0)` given `Q₀ = 0`:
/// `(c/(1-c)) e^{-c²x/2} ((2-c) erfcx((2-c)√(x/2)) - c erfcx(c√(x/2)))`.
pub fn d0_density(x: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_arg(x)?;
    let s = (0.5 * x).sqrt();
    let a = 2.0 - c;
    Ok(c / (1.0 - c) * (-0.5 * c * c * x).exp() * (a * erfcx(a * s)? - c * erfcx(c * s)?))
}

/// Mean busy-period length given `Q₀ > 0`, `(2-c)/(1-c)²`.
pub fn busy_length_mean(c: f64) -> f64 {
    (2.0 - c) / ((1.0 - c) * (1.0 - c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::quadrature::{integrate_left_singular, integrate_to_infinity, QuadratureSpec};
    use approx::assert_relative_eq;

    #[test]
    fn busy_length_reference() {
        // mpmath, tests/oracles/generate.py
        assert_relative_eq!(busy_length_density(1.0, 0.5).unwrap(), 0.159_328_249_870_570_1, max_relative = 1e-13);
        assert_eq!(busy_length_density(0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn densities_integrate_to_one() {
        let spec = QuadratureSpec::precise();
        for c in [0.2, 0.5, 0.8] {
            let head = |f: &dyn Fn(f64) -> f64| integrate_left_singular(f, 0.0, 1.0, 0.5, &spec).unwrap();
            let tail = |f: &dyn Fn(f64) -> f64| integrate_to_infinity(f, 1.0, &spec).unwrap();
            let fb = |v: f64| busy_length_density(v, c).unwrap();
            let fg = |v: f64| g1_density(v, c).unwrap();
            let fd = |v: f64| d0_density(v, c).unwrap();
            for f in [&fb as &dyn Fn(f64) -> f64, &fg, &fd] {
                assert_relative_eq!(head(f) + tail(f), 1.0, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn exchange_identity() {
        for c in [0.1, 0.3, 0.5, 0.77] {
            for x in [0.01, 0.4, 1.0, 3.0, 12.0, 40.0] {
                let a = d0_density(x, c).unwrap();
                let b = g1_density(x, 1.0 - c).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_of_endpoint_transform() {
        for c in [0.2, 0.5, 0.9] {
            for t in [0.0, 0.3, 2.0] {
                assert_relative_eq!(
                    endpoint_transform(t, t, 1.0 - c),
                    busy_length_transform(t, c),
                    max_relative = 1e-15
                );
                assert_relative_eq!(endpoint_transform(t, t, c), idle_length_transform(t, c), max_relative = 1e-15);
            }
            assert_relative_eq!(endpoint_transform(0.0, 0.0, c), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn joint_density_marginal() {
        // ∫_0^v f(x, v - x) dx = f_{g-b}(v)
        let c = 0.5;
        let v = 1.7;
        let spec = QuadratureSpec::precise();
        let m = crate::special_fns::quadrature::integrate(|x| joint_d0_g1_density(x, v - x, c).unwrap(), 0.0, v, &spec)
            .unwrap();
        assert_relative_eq!(m, busy_length_density(v, c).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(busy_length_density(1.0, 1.0).is_err());
        assert!(g1_density(-1.0, 0.5).is_err());
        assert!(d0_density(1.0, 0.0).is_err());
    }
}
