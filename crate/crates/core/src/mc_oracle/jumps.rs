//! Jump-size samplers for the Lévy measure `Π` of `-Λ`, truncated at `ε`.
//!
//! Jumps above `ε` are simulated one by one; those below are replaced by
//! their mean contribution `b_ε = ∫_0^ε u Π(du)` to the drift.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::levy_model::{LevyModel, ModelParams};

#[derive(Debug, Clone)]
pub enum JumpSampler {
    /// `Π(du) = (2πu³)^{-1/2} e^{-c²u/2} du`.
    Brownian { eps: f64, c: f64, rate: f64 },
    /// `Π(du) = (γ^ν/Γ(ν)) e^{-γu} u^{ν-2}(1 - ν + γu) du` (infinite activity,
    /// truncated at `ε`) plus `φ` times the Gamma(ν, γ) law (finite activity,
    /// simulated in full).
    TemperedStable {
        eps: f64,
        gamma: f64,
        nu: f64,
        rate_stable: f64,
        rate_gamma: f64,
        accept_norm: f64,
        gamma_law: Gamma<f64>,
    },
}

impl JumpSampler {
    pub fn new(model: &LevyModel, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("jump threshold must be > 0, got {eps}")));
        }
        match model.params() {
            ModelParams::Brownian(p) => {
                let c = p.c;
                let rate = (2.0 / (PI * eps)).sqrt() * (-0.5 * c * c * eps).exp() - c * libm::erfc(c * (0.5 * eps).sqrt());
                Ok(JumpSampler::Brownian { eps, c, rate })
            }
            ModelParams::TemperedStable(p) => {
                let (g, nu) = (p.gamma, p.nu);
                let rate_stable = g.powf(nu) / gamma(nu) * eps.powf(nu - 1.0) * (-g * eps).exp();
                // sup of e^{-γx}(1 - ν + γx) over x ≥ ε; attained at ν/γ
                let peak = (nu / g).max(eps);
                let accept_norm = (-g * peak).exp() * (1.0 - nu + g * peak);
                let gamma_law = Gamma::new(nu, 1.0 / g).map_err(|e| Error::Domain(format!("gamma law: {e}")))?;
                Ok(JumpSampler::TemperedStable {
                    eps,
                    gamma: g,
                    nu,
                    rate_stable,
                    rate_gamma: p.phi,
                    accept_norm,
                    gamma_law,
                })
            }
            ModelParams::Custom(_) => Err(Error::Unsupported(
                "Monte Carlo needs a jump measure; custom models are given by their exponent only".into(),
            )),
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            JumpSampler::Brownian { eps, .. } | JumpSampler::TemperedStable { eps, .. } => *eps,
        }
    }

    /// Rate of simulated jumps.
    pub fn rate(&self) -> f64 {
        match self {
            JumpSampler::Brownian { rate, .. } => *rate,
            JumpSampler::TemperedStable {
                rate_stable, rate_gamma, ..
            } => rate_stable + rate_gamma,
        }
    }

    /// `b_ε = ∫_0^ε u Π(du)` over the jumps that are not simulated.
    pub fn small_jump_mean(&self) -> f64 {
        match *self {
            JumpSampler::Brownian { eps, c, .. } => {
                if c == 0.0 {
                    (2.0 * eps / PI).sqrt()
                } else {
                    libm::erf(c * (0.5 * eps).sqrt()) / c
                }
            }
            JumpSampler::TemperedStable { eps, gamma, nu, .. } => {
                let z = gamma * eps;
                (1.0 - nu) * gamma_lr(nu, z) + nu * gamma_lr(nu + 1.0, z)
            }
        }
    }

    /// `∫_0^ε u² Π(du)`, the variance rate of the discarded jumps.
    pub fn small_jump_variance(&self) -> f64 {
        match *self {
            JumpSampler::Brownian { eps, c, .. } => {
                if c == 0.0 {
                    (2.0 / 3.0) * eps.powf(1.5) / (2.0 * PI).sqrt()
                } else {
                    let a = 0.5 * c * c;
                    gamma(1.5) * a.powf(-1.5) * gamma_lr(1.5, a * eps) / (2.0 * PI).sqrt()
                }
            }
            JumpSampler::TemperedStable { eps, gamma, nu, .. } => {
                let z = gamma * eps;
                ((1.0 - nu) * nu * gamma_lr(nu + 1.0, z) + nu * (nu + 1.0) * gamma_lr(nu + 2.0, z)) / gamma
            }
        }
    }

    /// Slope of `Λ` between simulated jumps, `δ - b_ε`.
    pub fn drift_slope(&self, drift: f64) -> Result<f64> {
        let s = drift - self.small_jump_mean();
        if s > 0.0 {
            Ok(s)
        } else {
            Err(Error::Simulation(format!(
                "compensated drift {s} is not positive; choose a smaller jump threshold than {}",
                self.epsilon()
            )))
        }
    }

    /// One jump size from `Π` restricted to the simulated range.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpSampler::Brownian { eps, c, .. } => {
                // Pareto(1/2) proposal ε/V², thinned by e^{-c²(u-ε)/2}
                let half_c2 = 0.5 * c * c;
                loop {
                    let v: f64 = 1.0 - rng.gen::<f64>();
                    let u = eps / (v * v);
                    if half_c2 == 0.0 || rng.gen::<f64>() < (-half_c2 * (u - eps)).exp() {
                        return u;
                    }
                }
            }
            JumpSampler::TemperedStable {
                eps,
                gamma,
                nu,
                rate_stable,
                rate_gamma,
                accept_norm,
                gamma_law,
            } => {
                if rng.gen::<f64>() * (rate_stable + rate_gamma) >= *rate_stable {
                    return gamma_law.sample(rng);
                }
                // Pareto(1-ν) proposal ε U^{-1/(1-ν)}, thinned by e^{-γx}(1-ν+γx)
                let inv = -1.0 / (1.0 - nu);
                loop {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let x = eps * u.powf(inv);
                    let h = (-gamma * x).exp() * (1.0 - nu + gamma * x);
                    if rng.gen::<f64>() * accept_norm < h {
                        return x;
                    }
                }
            }
        }
    }
}
