//! Distributional laws of the busy period `B`, idle period `I` and busy-period
//! maximum `Q*`, under the Palm measure at busy-period starts and conditional
//! on the state at time zero.

pub mod brownian;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::scale_fn::ScaleFunction;
use crate::special_fns::quadrature::{convolve, integrate, QuadratureSpec};

/// Points closer than this (relative) count as the diagonal `α = β`.
pub const REMOVABLE_WINDOW: f64 = 1e-7;
/// Below this relative gap a secant slope of `ψ` is computed as the mean of
/// `ψ'` instead of a difference quotient.
pub const SECANT_WINDOW: f64 = 0.05;
/// Step of the symmetric difference that realizes the diagonal `α = β`.
pub const DIAGONAL_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    BusyLength,
    IdleLength,
    G1,
    D0Idle,
    JointD0G1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    TripleLaw,
    JointBI,
    BusyLT,
    IdleLT,
    QstarCDF,
    QstarTail,
    IdleEndpointsLT,
    BusyEndpointsMaxLT,
    BusyEndpointsLT,
    QstarCondCDF,
    BrownianDensity(DensityKind),
}

impl LawKind {
    pub const NAMES: [&'static str; 15] = [
        "triple",
        "joint_bi",
        "busy_lt",
        "idle_lt",
        "qstar_cdf",
        "qstar_tail",
        "idle_endpoints_lt",
        "busy_endpoints_max_lt",
        "busy_endpoints_lt",
        "qstar_cond_cdf",
        "density:busy_length",
        "density:idle_length",
        "density:g1",
        "density:d0_idle",
        "density:joint_d0_g1",
    ];

    pub fn parse(name: &str) -> Result<Self> {
        let n = name.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match n.as_str() {
            "triple" | "triple_law" | "triplelaw" => LawKind::TripleLaw,
            "joint_bi" | "jointbi" => LawKind::JointBI,
            "busy_lt" | "busylt" => LawKind::BusyLT,
            "idle_lt" | "idlelt" => LawKind::IdleLT,
            "qstar_cdf" | "qstarcdf" => LawKind::QstarCDF,
            "qstar_tail" | "qstartail" => LawKind::QstarTail,
            "idle_endpoints_lt" | "idleendpointslt" => LawKind::IdleEndpointsLT,
            "busy_endpoints_max_lt" | "busyendpointsmaxlt" => LawKind::BusyEndpointsMaxLT,
            "busy_endpoints_lt" | "busyendpointslt" => LawKind::BusyEndpointsLT,
            "qstar_cond_cdf" | "qstarcondcdf" => LawKind::QstarCondCDF,
            "density:busy_length" | "busy_length" => LawKind::BrownianDensity(DensityKind::BusyLength),
            "density:idle_length" | "idle_length" => LawKind::BrownianDensity(DensityKind::IdleLength),
            "density:g1" | "g1" => LawKind::BrownianDensity(DensityKind::G1),
            "density:d0_idle" | "d0_idle" | "d0" => LawKind::BrownianDensity(DensityKind::D0Idle),
            "density:joint_d0_g1" | "joint_d0_g1" => LawKind::BrownianDensity(DensityKind::JointD0G1),
            _ => {
                return Err(Error::Domain(format!(
                    "unknown law '{name}', expected one of: {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    /// Identifier of the formula behind the law, echoed in outputs.
    pub fn formula(&self) -> &'static str {
        match self {
            LawKind::TripleLaw => "triple-law: 1 - (1 + (a - psi(b)) int_0^x e^{-by} W^(a)) / (delta e^{-bx} W^(a)(x))",
            LawKind::JointBI => "joint-bi: 1 - (a - psi(b)) / (delta (Phi(a) - b))",
            LawKind::BusyLT => "busy-lt: 1 - a / (delta Phi(a))",
            LawKind::IdleLT => "idle-lt: 1 - psi(b) / (delta (b - Phi(0)))",
            LawKind::QstarCDF => "qstar-cdf: 1 - 1 / (delta W(x))",
            LawKind::QstarTail => "qstar-tail: psi'(Phi(0)) / delta * e^{-Phi(0) x}",
            LawKind::IdleEndpointsLT => {
                "idle-endpoints: Phi(0)/(-psi'(0)) (g(a) - g(b))/(a - b), g(s) = psi(s)/(s - Phi(0))"
            }
            LawKind::BusyEndpointsMaxLT => {
                "busy-endpoints-max: Phi(0) (A(a,x) - A(b,x))/(a - b), A(q,x) = (1 + q int_0^x W^(q))/W^(q)(x)"
            }
            LawKind::BusyEndpointsLT => "busy-endpoints: Phi(0) (a/Phi(a) - b/Phi(b))/(a - b)",
            LawKind::QstarCondCDF => "qstar-cond-cdf: Phi(0) (W int_0^x W - (W*W)(x)) / W(x)^2",
            LawKind::BrownianDensity(DensityKind::BusyLength) => "busy-length-density (brownian)",
            LawKind::BrownianDensity(DensityKind::IdleLength) => "idle-length-density (brownian)",
            LawKind::BrownianDensity(DensityKind::G1) => "g1-density (brownian)",
            LawKind::BrownianDensity(DensityKind::D0Idle) => "d0-density (brownian)",
            LawKind::BrownianDensity(DensityKind::JointD0G1) => "joint-d0-g1-density (brownian)",
        }
    }

    /// Short identifier, the first token of [`formula`](Self::formula).
    pub fn formula_id(&self) -> &'static str {
        let f = self.formula();
        &f[..f.find([':', ' ']).unwrap_or(f.len())]
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.formula_id())
    }
}

/// A request to evaluate a law. `x` may be `+∞` where the law allows it;
/// `y` is the second argument of the joint density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawQuery {
    pub law: LawKind,
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

impl LawQuery {
    pub fn new(law: LawKind, alpha: f64, beta: f64, x: f64) -> Self {
        Self {
            law,
            alpha,
            beta,
            x,
            y: 0.0,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawMeta {
    pub formula: String,
    pub law: LawKind,
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawValue {
    pub value: f64,
    pub meta: LawMeta,
}

fn law_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    }
}

/// Probabilities computed as `1 - (…)` may leave `[0, 1]` by rounding.
fn clamp_unit(v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("law evaluated to {v}")));
    }
    if v < -1e-9 || v > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("probability {v} outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must be >= 0 (or +inf), got {x}")))
    }
}

/// Evaluator of every law for one valid model. Scale functions are created
/// on demand and shared.
#[derive(Debug)]
pub struct ExcursionLaws {
    model: LevyModel,
    delta: f64,
    phi0: f64,
    psi_prime0: f64,
    scale: RwLock<HashMap<u64, Arc<ScaleFunction>>>,
}

impl ExcursionLaws {
    pub fn new(model: &LevyModel) -> Result<Self> {
        model.ensure_valid()?;
        Ok(Self {
            model: model.clone(),
            delta: model.drift(),
            phi0: model.phi_inverse(0.0)?,
            psi_prime0: model.psi_prime(0.0)?,
            scale: RwLock::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    /// `Φ(0)`.
    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Shared `W^{(q)}` evaluator.
    pub fn scale_function(&self, q: f64) -> Result<Arc<ScaleFunction>> {
        let key = q.to_bits();
        if let Some(w) = self.scale.read().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(w);
        }
        let w = Arc::new(ScaleFunction::new(&self.model, q)?);
        if let Ok(mut m) = self.scale.write() {
            return Ok(m.entry(key).or_insert(w).clone());
        }
        Ok(w)
    }

    /// `E_d[e^{-αB-βI} 1(Q* ≤ x)]`.
    pub fn triple_law(&self, alpha: f64, beta: f64, x: f64) -> Result<f64> {
        check_nonneg("alpha", alpha)?;
        check_nonneg("beta", beta)?;
        check_x(x)?;
        if x.is_infinite() {
            return self.joint_bi_transform(alpha, beta);
        }
        let w = self.scale_function(alpha)?;
        let inv_tilted = (beta * x - w.ln_eval(x)?).exp();
        let mut bracket = inv_tilted;
        let coef = alpha - self.model.psi(beta)?;
        if coef != 0.0 && x > 0.0 {
            bracket += coef * w.integral_ratio(x, beta)?;
        }
        clamp_unit(1.0 - bracket / self.delta)
    }

    /// `E_d[e^{-αB-βI}]`.
    ///
    /// Since `α = ψ(Φ(α))` the ratio `(α - ψ(β))/(Φ(α) - β)` is a secant slope
    /// of `ψ`; near `Φ(α) = β` it is taken as the mean of `ψ'` over the gap,
    /// which tends to `ψ'(β)` without a 0/0.
    pub fn joint_bi_transform(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_nonneg("alpha", alpha)?;
        check_nonneg("beta", beta)?;
        let phi_a = self.model.phi_inverse(alpha)?;
        let den = phi_a - beta;
        let ratio = if den.abs() < SECANT_WINDOW * (1.0 + beta) {
            self.psi_secant(beta, phi_a)?
        } else {
            (alpha - self.model.psi(beta)?) / den
        };
        clamp_unit(1.0 - ratio / self.delta)
    }

    /// `(ψ(b) - ψ(a))/(b - a)`, or `∫_0^1 ψ'(a + t(b - a)) dt` when `b` is
    /// close to `a`.
    fn psi_secant(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return self.model.psi_prime(a);
        }
        if (b - a).abs() >= SECANT_WINDOW * (1.0 + a.abs()) {
            return Ok((self.model.psi(b)? - self.model.psi(a)?) / (b - a));
        }
        let mut err = None;
        let v = integrate(
            |t| match self.model.psi_prime(a + t * (b - a)) {
                Ok(d) => d,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            &QuadratureSpec::precise(),
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// `E_d[e^{-αB}]`.
    pub fn busy_transform(&self, alpha: f64) -> Result<f64> {
        self.joint_bi_transform(alpha, 0.0)
    }

    /// `E_d[e^{-βI}]`.
    pub fn idle_transform(&self, beta: f64) -> Result<f64> {
        self.joint_bi_transform(0.0, beta)
    }

    /// `E_d[B] = 1/(δΦ(0))`.
    pub fn busy_mean(&self) -> f64 {
        1.0 / (self.delta * self.phi0)
    }

    /// `E_d[I] = -ψ'(0+)/(δΦ(0))`.
    pub fn idle_mean(&self) -> f64 {
        -self.psi_prime0 / (self.delta * self.phi0)
    }

    /// `E_d[B + I] = (1 - ψ'(0+))/(δΦ(0))`.
    pub fn cycle_mean(&self) -> f64 {
        (1.0 - self.psi_prime0) / (self.delta * self.phi0)
    }

    /// Rate of busy-period starts, `δΦ(0)/(1 - ψ'(0+))`.
    pub fn cycle_rate(&self) -> f64 {
        self.delta * self.phi0 / (1.0 - self.psi_prime0)
    }

    /// `P_d(Q* ≤ x) = 1 - 1/(δW(x))`.
    pub fn qstar_cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        if x.is_infinite() {
            return Ok(1.0);
        }
        clamp_unit(1.0 - self.qstar_survival(x)?)
    }

    /// `P_d(Q* > x) = 1/(δW(x))`, computed directly rather than as `1 - cdf`.
    pub fn qstar_survival(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        if x.is_infinite() {
            return Ok(0.0);
        }
        let w = self.scale_function(0.0)?;
        Ok((-w.ln_eval(x)? - self.delta.ln()).exp())
    }

    /// Exponential tail `(ψ'(Φ(0))/δ) e^{-Φ(0)x}` of `P_d(Q* > x)`.
    pub fn qstar_tail_asymptote(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self.tail_constant()? * (-self.phi0 * x).exp())
    }

    /// `ψ'(Φ(0))/δ`, the limit of `e^{Φ(0)x} P_d(Q* > x)`.
    pub fn tail_constant(&self) -> Result<f64> {
        Ok(self.model.psi_prime(self.phi0)? / self.delta)
    }

    // ψ(s)/(s - Φ(0)) = secant slope of ψ between Φ(0) and s
    fn idle_g(&self, s: f64) -> Result<f64> {
        self.psi_secant(self.phi0, s)
    }

    /// `E[e^{-αd(0)+βg(0)} | Q₀ = 0]`.
    pub fn idle_endpoints_transform(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_nonneg("alpha", alpha)?;
        check_nonneg("beta", beta)?;
        let scale = self.phi0 / -self.psi_prime0;
        let dq = divided_difference(|s| self.idle_g(s), alpha, beta)?;
        Ok(scale * dq)
    }

    /// `(1 + q ∫_0^x W^{(q)})/W^{(q)}(x)`.
    fn busy_a(&self, q: f64, x: f64) -> Result<f64> {
        let w = self.scale_function(q)?;
        let inv = (-w.ln_eval(x)?).exp();
        if q == 0.0 || x == 0.0 {
            return Ok(inv);
        }
        Ok(inv + q * w.integral_ratio(x, 0.0)?)
    }

    /// `E[e^{-αg(1)+βd(0)} 1(Q* ≤ x) | Q₀ > 0]`; `x = ∞` gives
    /// [`busy_endpoints_transform`](Self::busy_endpoints_transform).
    pub fn busy_endpoints_max_transform(&self, alpha: f64, beta: f64, x: f64) -> Result<f64> {
        check_nonneg("alpha", alpha)?;
        check_nonneg("beta", beta)?;
        check_x(x)?;
        if x.is_infinite() {
            return self.busy_endpoints_transform(alpha, beta);
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        if alpha == 0.0 && beta == 0.0 {
            return self.qstar_conditional_cdf(x);
        }
        let dq = divided_difference(|q| self.busy_a(q.max(0.0), x), alpha, beta)?;
        Ok(self.phi0 * dq)
    }

    /// `E[e^{-αg(1)+βd(0)} | Q₀ > 0] = Φ(0)(α/Φ(α) - β/Φ(β))/(α - β)`.
    pub fn busy_endpoints_transform(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_nonneg("alpha", alpha)?;
        check_nonneg("beta", beta)?;
        let k = |q: f64| -> Result<f64> {
            let q = q.max(0.0);
            Ok(q / self.model.phi_inverse(q)?)
        };
        Ok(self.phi0 * divided_difference(k, alpha, beta)?)
    }

    /// `P(Q* ≤ x | Q₀ > 0) = Φ(0)(W(x)∫_0^x W - (W*W)(x))/W(x)²`.
    pub fn qstar_conditional_cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        if x.is_infinite() {
            return Ok(1.0);
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let w = self.scale_function(0.0)?;
        let top = w.ln_eval(x)?;
        let ratio = w.integral_ratio(x, 0.0)?;
        let scaled = |y: f64| (w.ln_eval(y).unwrap_or(f64::NAN) - top).exp();
        let conv = convolve(scaled, scaled, x, &law_quadrature())?;
        if !conv.is_finite() {
            return Err(Error::Domain(format!("scale function failed inside the convolution at x = {x}")));
        }
        clamp_unit(self.phi0 * (ratio - conv))
    }

    fn brownian_c(&self) -> Result<f64> {
        self.model
            .brownian_c()
            .ok_or_else(|| Error::Unsupported(format!("closed-form densities need the Brownian model, got {}", self.model.describe())))
    }

    pub fn brownian_density(&self, which: DensityKind, x: f64, y: f64) -> Result<f64> {
        let c = self.brownian_c()?;
        match which {
            DensityKind::BusyLength => brownian::busy_length_density(x, c),
            DensityKind::IdleLength => brownian::idle_length_density(x, c),
            DensityKind::G1 => brownian::g1_density(x, c),
            DensityKind::D0Idle => brownian::d0_density(x, c),
            DensityKind::JointD0G1 => brownian::joint_d0_g1_density(x, y, c),
        }
    }

    /// Evaluates a query at its own `x` (or at every grid point).
    pub fn evaluate(&self, query: &LawQuery) -> Result<Vec<LawValue>> {
        let points = match &query.grid {
            Some(g) => g.clone(),
            None => vec![query.x],
        };
        points
            .into_iter()
            .map(|x| {
                let value = self.evaluate_at(query.law, query.alpha, query.beta, x, query.y)?;
                Ok(LawValue {
                    value,
                    meta: LawMeta {
                        formula: query.law.formula().to_string(),
                        law: query.law,
                        alpha: query.alpha,
                        beta: query.beta,
                        x,
                        y: query.y,
                    },
                })
            })
            .collect()
    }

    pub fn evaluate_at(&self, law: LawKind, alpha: f64, beta: f64, x: f64, y: f64) -> Result<f64> {
        match law {
            LawKind::TripleLaw => self.triple_law(alpha, beta, x),
            LawKind::JointBI => self.joint_bi_transform(alpha, beta),
            LawKind::BusyLT => self.busy_transform(alpha),
            LawKind::IdleLT => self.idle_transform(beta),
            LawKind::QstarCDF => self.qstar_cdf(x),
            LawKind::QstarTail => self.qstar_tail_asymptote(x),
            LawKind::IdleEndpointsLT => self.idle_endpoints_transform(alpha, beta),
            LawKind::BusyEndpointsMaxLT => self.busy_endpoints_max_transform(alpha, beta, x),
            LawKind::BusyEndpointsLT => self.busy_endpoints_transform(alpha, beta),
            LawKind::QstarCondCDF => self.qstar_conditional_cdf(x),
            LawKind::BrownianDensity(k) => self.brownian_density(k, x, y),
        }
    }
}

/// `(f(a) - f(b))/(a - b)`, with the derivative `f'(a)` on the diagonal
/// `|a - b| < 1e-7(1 + a)`: a symmetric difference with step
/// [`DIAGONAL_STEP`], or a one-sided three-point stencil when `a` is closer
/// to zero than the step.
pub fn divided_difference<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if (a - b).abs() >= REMOVABLE_WINDOW * (1.0 + a) {
        return Ok((f(a)? - f(b)?) / (a - b));
    }
    let m = 0.5 * (a + b);
    let h = DIAGONAL_STEP;
    // each stencil is extrapolated once (Richardson) from steps h and h/2
    if m >= h {
        let central = |h: f64| -> Result<f64> { Ok((f(m + h)? - f(m - h)?) / (2.0 * h)) };
        Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
    } else {
        let f0 = f(m)?;
        let one_sided = |h: f64| -> Result<f64> { Ok((-3.0 * f0 + 4.0 * f(m + h)? - f(m + 2.0 * h)?) / (2.0 * h)) };
        Ok((4.0 * one_sided(0.5 * h)? - one_sided(h)?) / 3.0)
    }
}
