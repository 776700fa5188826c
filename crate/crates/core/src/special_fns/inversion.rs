//! Numerical inversion of Laplace transforms.
//!
//! Two methods are offered. Gaver-Stehfest needs the transform only on the
//! positive real axis; Fixed Talbot deforms the Bromwich contour around the
//! negative real axis and needs complex evaluations, but holds far more
//! digits in double precision.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InversionMethod {
    GaverStehfest,
    FixedTalbot,
}

impl fmt::Display for InversionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InversionMethod::GaverStehfest => f.write_str("gaver-stehfest"),
            InversionMethod::FixedTalbot => f.write_str("fixed-talbot"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionSpec {
    pub method: InversionMethod,
    pub order: usize,
}

/// Relative disagreement between two orders above which a result is rejected.
pub const INSTABILITY_THRESHOLD: f64 = 1e-4;

impl InversionSpec {
    pub fn new(method: InversionMethod, order: usize) -> Result<Self> {
        match method {
            InversionMethod::GaverStehfest if order < 8 || order % 2 == 1 => Err(Error::Domain(format!(
                "Gaver-Stehfest order must be even and >= 8, got {order}"
            ))),
            // beyond ~20 the weights exceed 1e15 and double precision is lost
            InversionMethod::GaverStehfest if order > 20 => Err(Error::Domain(format!(
                "Gaver-Stehfest order {order} exceeds double-precision range (max 20)"
            ))),
            InversionMethod::FixedTalbot if order < 16 => Err(Error::Domain(format!(
                "Fixed Talbot needs at least 16 nodes, got {order}"
            ))),
            InversionMethod::FixedTalbot if order > 80 => Err(Error::Domain(format!(
                "Fixed Talbot node count {order} overflows exp(2M/5)·F (max 80)"
            ))),
            _ => Ok(Self { method, order }),
        }
    }

    pub fn gaver_stehfest(order: usize) -> Result<Self> {
        Self::new(InversionMethod::GaverStehfest, order)
    }

    pub fn fixed_talbot(nodes: usize) -> Result<Self> {
        Self::new(InversionMethod::FixedTalbot, nodes)
    }

    /// The order used for the stability cross-check.
    fn lower(&self) -> usize {
        match self.method {
            InversionMethod::GaverStehfest => self.order - 2,
            InversionMethod::FixedTalbot => (self.order * 3 / 4).max(12),
        }
    }
}

impl Default for InversionSpec {
    fn default() -> Self {
        Self {
            method: InversionMethod::FixedTalbot,
            order: 32,
        }
    }
}

/// Stehfest weights `V_k`, `k = 1..=n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |m: usize| (1..=m).fold(1.0_f64, |acc, i| acc * i as f64);
    (1..=n)
        .map(|k| {
            let lo = (k + 1) / 2;
            let hi = k.min(half);
            let mut s = 0.0;
            for j in lo..=hi {
                s += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + half) % 2 == 1 {
                -s
            } else {
                s
            }
        })
        .collect()
}

/// Compensated summation; the Stehfest terms alternate with magnitudes far
/// above the result.
fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn gaver_stehfest<F>(f: &F, x: f64, order: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let a = LN_2 / x;
    let w = stehfest_weights(order);
    let sum = neumaier_sum(w.iter().enumerate().map(|(i, v)| v * f(Complex64::new(a * (i + 1) as f64, 0.0)).re));
    a * sum
}

fn fixed_talbot<F>(f: &F, x: f64, nodes: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * x);
    let mut acc = 0.5 * (f(Complex64::new(r, 0.0)).re * (r * x).exp());
    for k in 1..nodes {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * x).exp() * f(s) * Complex64::new(1.0, sigma);
        acc += term.re;
    }
    r / m * acc
}

fn invert_once<F>(f: &F, x: f64, method: InversionMethod, order: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    match method {
        InversionMethod::GaverStehfest => gaver_stehfest(f, x, order),
        InversionMethod::FixedTalbot => fixed_talbot(f, x, order),
    }
}

/// Invert `F` at `x > 0` and check the result against a lower order.
///
/// `F` must be analytic for `Re s > 0` (use [`laplace_invert_shifted`] when
/// the abscissa of convergence is positive).
pub fn laplace_invert<F>(f: F, x: f64, spec: &InversionSpec) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    laplace_invert_shifted(f, x, 0.0, spec)
}

/// Invert a transform whose abscissa of convergence is `shift`, via
/// `f(x) = e^{shift·x} L⁻¹[s ↦ F(s + shift)](x)`.
pub fn laplace_invert_shifted<F>(f: F, x: f64, shift: f64, spec: &InversionSpec) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    Ok(laplace_invert_damped(f, x, shift, spec)? * (shift * x).exp())
}

/// `e^{-shift·x} f(x)`, the shifted inverse before the exponential factor is
/// restored. Useful when `f` itself would overflow.
pub fn laplace_invert_damped<F>(f: F, x: f64, shift: f64, spec: &InversionSpec) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Laplace inversion needs x > 0, got {x}")));
    }
    let g = |s: Complex64| f(s + shift);
    let value = invert_once(&g, x, spec.method, spec.order);
    let lower = invert_once(&g, x, spec.method, spec.lower());
    let scale = value.abs().max(lower.abs());
    if !value.is_finite() || (value - lower).abs() > INSTABILITY_THRESHOLD * scale.max(1e-300) {
        return Err(Error::InversionUnstable {
            x,
            order: spec.order,
            value,
            lower,
        });
    }
    Ok(value)
}
