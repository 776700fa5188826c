//! Spectrally negative, bounded-variation Lévy processes `Λ_t = δ t - S_t`
//! where `S` is the inverse local time of the queue's input.
//!
//! Everything downstream only needs the Laplace exponent
//! `ψ(θ) = log E[exp(θ Λ_1)]`, its derivative, its right inverse `Φ` and the
//! drift `δ`. Two families have closed forms; anything else can be plugged in
//! through [`CustomExponent`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    BrownianLocalTime,
    TemperedStableLocalTime,
    Custom,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::BrownianLocalTime => "brownian",
            ModelKind::TemperedStableLocalTime => "tempered-stable",
            ModelKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Local time at zero of a reflected Brownian motion with drift `-c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianParams {
    pub c: f64,
}

/// Inverse local time = compound Poisson with Gamma(ν, γ) jumps at rate φ plus
/// an independent driftless tempered-stable subordinator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperedStableParams {
    pub phi: f64,
    pub gamma: f64,
    pub nu: f64,
}

/// A user supplied Laplace exponent, evaluated on the complex plane so that
/// it can feed contour-based transform inversion. Real arguments are
/// evaluated through the same callable.
#[derive(Clone)]
pub struct CustomExponent {
    label: String,
    psi: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl CustomExponent {
    pub fn new<F>(label: impl Into<String>, psi: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            psi: Arc::new(psi),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CustomExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomExponent")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum ModelParams {
    Brownian(BrownianParams),
    TemperedStable(TemperedStableParams),
    Custom(CustomExponent),
}

#[derive(Clone, Debug)]
pub struct LevyModel {
    drift: f64,
    params: ModelParams,
}

/// Relative tolerance on θ at which the Φ root finder stops.
pub const PHI_REL_TOL: f64 = 1e-12;
const PHI_MAX_ITER: usize = 200;

impl LevyModel {
    /// Brownian local-time input; the drift of `Λ` is 1.
    pub fn brownian(c: f64) -> Self {
        Self {
            drift: 1.0,
            params: ModelParams::Brownian(BrownianParams { c }),
        }
    }

    /// Tempered-stable input; the drift of `Λ` is 1.
    pub fn tempered_stable(phi: f64, gamma: f64, nu: f64) -> Self {
        Self {
            drift: 1.0,
            params: ModelParams::TemperedStable(TemperedStableParams { phi, gamma, nu }),
        }
    }

    /// A model given directly by its exponent and declared drift `δ`.
    pub fn custom(drift: f64, exponent: CustomExponent) -> Self {
        Self {
            drift,
            params: ModelParams::Custom(exponent),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Brownian(_) => ModelKind::BrownianLocalTime,
            ModelParams::TemperedStable(_) => ModelKind::TemperedStableLocalTime,
            ModelParams::Custom(_) => ModelKind::Custom,
        }
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn brownian_c(&self) -> Option<f64> {
        match self.params {
            ModelParams::Brownian(p) => Some(p.c),
            _ => None,
        }
    }

    /// Short human-readable description, used in CSV headers and reports.
    pub fn describe(&self) -> String {
        match &self.params {
            ModelParams::Brownian(p) => format!("brownian(c={})", p.c),
            ModelParams::TemperedStable(p) => {
                format!("tempered-stable(phi={},gamma={},nu={})", p.phi, p.gamma, p.nu)
            }
            ModelParams::Custom(e) => format!("custom({}, drift={})", e.label, self.drift),
        }
    }

    /// Laplace exponent `ψ(θ)` for `θ ≥ 0`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        if theta == 0.0 {
            return Ok(0.0);
        }
        Ok(self.psi_unchecked(theta))
    }

    /// `ψ` without the domain check. Both closed forms extend analytically a
    /// little to the left of zero, which the finite-difference code uses.
    pub(crate) fn psi_unchecked(&self, theta: f64) -> f64 {
        match &self.params {
            ModelParams::Brownian(p) => {
                // θ - (√(2θ+c²) - c), with the bracket rationalized
                theta - 2.0 * theta / ((2.0 * theta + p.c * p.c).sqrt() + p.c)
            }
            ModelParams::TemperedStable(p) => {
                let one_minus_ratio = -libm::expm1(-p.nu * libm::log1p(theta / p.gamma));
                (theta - p.phi) * one_minus_ratio
            }
            ModelParams::Custom(e) => (e.psi)(Complex64::new(theta, 0.0)).re,
        }
    }

    /// `ψ` on the complex plane (principal branches), for transform inversion.
    pub fn psi_complex(&self, s: Complex64) -> Complex64 {
        match &self.params {
            ModelParams::Brownian(p) => s - 2.0 * s / ((2.0 * s + p.c * p.c).sqrt() + p.c),
            ModelParams::TemperedStable(p) => {
                let one_minus_ratio = Complex64::new(1.0, 0.0) - (-p.nu * (1.0 + s / p.gamma).ln()).exp();
                (s - p.phi) * one_minus_ratio
            }
            ModelParams::Custom(e) => (e.psi)(s),
        }
    }

    /// `ψ'(θ)`; at `θ = 0` this is the right derivative `ψ'(0+) = E Λ_1`.
    pub fn psi_prime(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(match &self.params {
            ModelParams::Brownian(p) => 1.0 - 1.0 / (2.0 * theta + p.c * p.c).sqrt(),
            ModelParams::TemperedStable(p) => {
                let ratio = (-p.nu * libm::log1p(theta / p.gamma)).exp();
                (1.0 - ratio) + (theta - p.phi) * p.nu * ratio / (p.gamma + theta)
            }
            ModelParams::Custom(_) => self.psi_prime_numeric(theta),
        })
    }

    /// Fourth-order finite difference of `ψ`; one-sided close to the origin
    /// because a custom exponent need not exist for `θ < 0`.
    pub fn psi_prime_numeric(&self, theta: f64) -> f64 {
        let h = (1e-6 * theta).max(1e-6);
        let f = |t: f64| if t == 0.0 { 0.0 } else { self.psi_unchecked(t) };
        if theta >= 2.0 * h {
            (-f(theta + 2.0 * h) + 8.0 * f(theta + h) - 8.0 * f(theta - h) + f(theta - 2.0 * h))
                / (12.0 * h)
        } else {
            (-25.0 * f(theta) + 48.0 * f(theta + h) - 36.0 * f(theta + 2.0 * h)
                + 16.0 * f(theta + 3.0 * h)
                - 3.0 * f(theta + 4.0 * h))
                / (12.0 * h)
        }
    }

    /// Right inverse `Φ(q) = sup{θ ≥ 0 : ψ(θ) = q}`.
    pub fn phi_inverse(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("Phi(q) needs finite q >= 0, got {q}")));
        }
        match &self.params {
            ModelParams::Brownian(p) => Ok(brownian_phi(p.c, q)),
            ModelParams::TemperedStable(p) if q == 0.0 => Ok(p.phi),
            _ => self.phi_inverse_numeric(q),
        }
    }

    /// Root-finder route to `Φ(q)`: bracket, then Newton from the right with
    /// bisection as a safeguard. Kept public as a cross-check of the closed
    /// forms.
    pub fn phi_inverse_numeric(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("Phi(q) needs finite q >= 0, got {q}")));
        }
        let psi = |t: f64| if t == 0.0 { 0.0 } else { self.psi_unchecked(t) };
        let dpsi = |t: f64| self.psi_prime(t).unwrap_or(f64::NAN);

        // Upper end: ψ(hi) > q on the increasing branch.
        let mut hi = 1.0_f64;
        let mut iterations = 0;
        while !(psi(hi) > q && dpsi(hi) > 0.0) {
            hi *= 2.0;
            iterations += 1;
            if iterations > 1100 || !hi.is_finite() {
                return Err(Error::RootNotConverged {
                    what: "Phi upper bracket",
                    lo: 0.0,
                    hi,
                    iterations,
                });
            }
        }

        // Lower end: the minimiser of the convex ψ (ψ' changes sign there),
        // or 0 when ψ is increasing from the start.
        let mut lo = 0.0_f64;
        if dpsi(0.0) < 0.0 {
            let (mut a, mut b) = (0.0_f64, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if dpsi(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= 1e-15 * b {
                    break;
                }
            }
            lo = a;
        }
        if psi(lo) > q {
            return Err(Error::RootNotConverged {
                what: "Phi lower bracket",
                lo,
                hi,
                iterations: 0,
            });
        }

        let mut theta = hi;
        for _ in 0..PHI_MAX_ITER {
            let g = psi(theta) - q;
            if g > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let d = dpsi(theta);
            let mut next = theta - g / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - theta).abs();
            theta = next;
            if step <= PHI_REL_TOL * theta.abs().max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi {
                // one more Newton step to reach full precision
                let g = psi(theta) - q;
                let d = dpsi(theta);
                let polished = theta - g / d;
                if polished.is_finite() && (polished - theta).abs() <= 1e-9 * theta.max(1e-300) {
                    theta = polished;
                }
                return Ok(theta);
            }
        }
        Err(Error::RootNotConverged {
            what: "Phi",
            lo,
            hi,
            iterations: PHI_MAX_ITER,
        })
    }

    /// Stationary rate `μ` of the local time. With `Λ_t = t - L⁻¹_t` and
    /// `E L⁻¹_1 = 1/μ` this is `1 / (1 - ψ'(0+))`.
    pub fn local_time_rate(&self) -> Result<f64> {
        Ok(1.0 / (1.0 - self.psi_prime(0.0)?))
    }

    /// Violated assumptions, as human-readable strings; empty when the model
    /// can feed every queue law.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.drift > 0.0) || !self.drift.is_finite() {
            out.push("drift must be > 0".to_string());
        }
        match &self.params {
            ModelParams::Brownian(p) => {
                if !(p.c > 0.0 && p.c < 1.0) {
                    out.push("c must lie in (0,1) for queue laws".to_string());
                }
            }
            ModelParams::TemperedStable(p) => {
                if !(p.phi > 0.0) || !p.phi.is_finite() {
                    out.push("phi must be > 0".to_string());
                }
                if !(p.gamma > 0.0) || !p.gamma.is_finite() {
                    out.push("gamma must be > 0".to_string());
                }
                if !(p.nu > 0.0 && p.nu < 1.0) {
                    out.push("nu must lie in (0,1)".to_string());
                }
            }
            ModelParams::Custom(_) => {}
        }
        if out.is_empty() {
            match self.psi_prime(0.0) {
                Ok(d) if d < 0.0 => {}
                Ok(d) => out.push(format!("psi'(0+) must be negative, got {d}")),
                Err(e) => out.push(format!("psi'(0+) not computable: {e}")),
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("psi needs finite theta >= 0, got {theta}")))
    }
}

/// `Φ(q)` for the Brownian model: the larger root `√(2θ+c²) = 1 + √((1-c)²+2q)`.
fn brownian_phi(c: f64, q: f64) -> f64 {
    let lambda1 = 1.0 + ((1.0 - c) * (1.0 - c) + 2.0 * q).sqrt();
    0.5 * (lambda1 - c) * (lambda1 + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn psi_vanishes_at_origin_and_phi0() {
        let b = LevyModel::brownian(0.5);
        assert_eq!(b.psi(0.0).unwrap(), 0.0);
        assert!(b.psi(1.0).unwrap().abs() < 1e-15);
        let ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
        assert_eq!(ts.psi(0.0).unwrap(), 0.0);
        assert_eq!(ts.psi(1.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_theta_is_a_domain_error() {
        let b = LevyModel::brownian(0.5);
        assert!(matches!(b.psi(-0.1), Err(Error::Domain(_))));
        assert!(matches!(b.psi_prime(-0.1), Err(Error::Domain(_))));
        assert!(matches!(b.phi_inverse(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_prime_at_origin() {
        // symbolic: d/dθ [θ - √(2θ+c²) + c] = 1 - 1/√(2θ+c²)
        assert_relative_eq!(LevyModel::brownian(0.5).psi_prime(0.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(
            LevyModel::tempered_stable(1.0, 2.0, 0.5).psi_prime(0.0).unwrap(),
            -0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn psi_prime_tends_to_drift() {
        for m in [LevyModel::brownian(0.5), LevyModel::tempered_stable(1.0, 2.0, 0.5)] {
            let d = m.psi_prime(1e8).unwrap();
            assert!((d - m.drift()).abs() < 1e-3, "{d}");
        }
    }

    #[test]
    fn numeric_derivative_matches_closed_form() {
        for m in [LevyModel::brownian(0.3), LevyModel::tempered_stable(1.0, 2.0, 0.5)] {
            for theta in [0.0, 1e-7, 0.3, 2.0, 40.0] {
                let exact = m.psi_prime(theta).unwrap();
                let fd = m.psi_prime_numeric(theta);
                assert!((exact - fd).abs() < 1e-7 * (1.0 + exact.abs()), "{theta}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn phi_known_values() {
        assert_eq!(LevyModel::brownian(0.5).phi_inverse(0.0).unwrap(), 1.0);
        assert_eq!(LevyModel::tempered_stable(1.0, 2.0, 0.5).phi_inverse(0.0).unwrap(), 1.0);
        for c in [0.1, 0.3, 0.5, 0.9] {
            let m = LevyModel::brownian(c);
            let closed = m.phi_inverse(0.0).unwrap();
            assert_relative_eq!(closed, 2.0 * (1.0 - c), max_relative = 1e-15);
            assert_relative_eq!(m.phi_inverse_numeric(0.0).unwrap(), closed, max_relative = 1e-12);
        }
        let ts = LevyModel::tempered_stable(1.0, 2.0, 0.5);
        assert_relative_eq!(ts.phi_inverse_numeric(0.0).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn phi_round_trip() {
        let theta0 = 2.7;
        for m in [LevyModel::brownian(0.5), LevyModel::tempered_stable(1.0, 2.0, 0.5)] {
            let q = m.psi(theta0).unwrap();
            assert_relative_eq!(m.phi_inverse(q).unwrap(), theta0, max_relative = 1e-10);
            assert_relative_eq!(m.phi_inverse_numeric(q).unwrap(), theta0, max_relative = 1e-10);
        }
    }

    #[test]
    fn validation_messages() {
        assert!(LevyModel::brownian(0.5).validate().is_empty());
        assert_eq!(
            LevyModel::brownian(1.2).validate(),
            vec!["c must lie in (0,1) for queue laws".to_string()]
        );
        assert_eq!(
            LevyModel::tempered_stable(0.0, 2.0, 0.5).validate(),
            vec!["phi must be > 0".to_string()]
        );
        assert!(LevyModel::tempered_stable(1.0, 2.0, 0.5).validate().is_empty());
    }

    #[test]
    fn custom_exponent_behaves_like_builtin() {
        let c = 0.4;
        let m = LevyModel::custom(
            1.0,
            CustomExponent::new("brownian", move |s: Complex64| s - (2.0 * s + c * c).sqrt() + c),
        );
        assert!(m.validate().is_empty());
        let b = LevyModel::brownian(c);
        assert_relative_eq!(m.phi_inverse(0.5).unwrap(), b.phi_inverse(0.5).unwrap(), max_relative = 1e-11);
        assert_relative_eq!(m.psi_prime(0.7).unwrap(), b.psi_prime(0.7).unwrap(), max_relative = 1e-8);
        assert_relative_eq!(m.local_time_rate().unwrap(), c, max_relative = 1e-7);
    }

    #[test]
    fn tempered_stable_local_time_rate() {
        let m = LevyModel::tempered_stable(1.0, 2.0, 0.5);
        assert_relative_eq!(m.local_time_rate().unwrap(), 1.0 / (1.0 + 0.25), max_relative = 1e-14);
    }
}
