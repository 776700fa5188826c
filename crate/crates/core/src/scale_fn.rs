//! q-scale functions `W^{(q)}` and the integrals built from them.
//!
//! `W^{(q)}` vanishes on `(-∞, 0)`, equals `1/δ` at zero, increases, and has
//! Laplace transform `1/(ψ(θ) - q)` for `θ > Φ(q)`. Three engines evaluate it:
//! a closed form for the Brownian model, a Mittag-Leffler integral for the
//! tempered-stable model (`q = 0`), and numerical transform inversion for
//! everything else. Values are held as logarithms internally; `W^{(q)}` grows
//! like `e^{Φ(q)x}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{LevyModel, ModelParams, TemperedStableParams};
use crate::special_fns::erf::{erfc, ln_erfcx};
use crate::special_fns::inversion::{laplace_invert_damped, InversionSpec};
use crate::special_fns::mittag_leffler::mittag_leffler_scaled;
use crate::special_fns::pchip::Pchip;
use crate::special_fns::quadrature::{convolve, integrate_left_singular, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    ClosedFormBrownian,
    MittagLefflerTS,
    NumericInversion,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::ClosedFormBrownian => "closed-form-brownian",
            Engine::MittagLefflerTS => "mittag-leffler-ts",
            Engine::NumericInversion => "numeric-inversion",
        })
    }
}

/// Relative size of the monotone clamp above which a tabulation fails.
pub const MAX_CLAMP: f64 = 1e-6;

fn law_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    }
}

/// `W^{(q)}` for one model and one `q`.
#[derive(Debug)]
pub struct ScaleFunction {
    model: LevyModel,
    q: f64,
    engine: Engine,
    inversion: InversionSpec,
    phi_q: f64,
    // ln W keyed by the bit pattern of x; insert-only
    memo: RwLock<HashMap<u64, f64>>,
}

impl Clone for ScaleFunction {
    fn clone(&self) -> Self {
        Self {
            model: self.model.clone(),
            q: self.q,
            engine: self.engine,
            inversion: self.inversion,
            phi_q: self.phi_q,
            memo: RwLock::new(self.memo.read().map(|m| m.clone()).unwrap_or_default()),
        }
    }
}

impl ScaleFunction {
    /// Picks the most direct engine available for the model.
    pub fn new(model: &LevyModel, q: f64) -> Result<Self> {
        let engine = match model.params() {
            ModelParams::Brownian(_) => Engine::ClosedFormBrownian,
            ModelParams::TemperedStable(_) if q == 0.0 => Engine::MittagLefflerTS,
            _ => Engine::NumericInversion,
        };
        Self::with_engine(model, q, engine)
    }

    pub fn with_engine(model: &LevyModel, q: f64, engine: Engine) -> Result<Self> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("scale function needs finite q >= 0, got {q}")));
        }
        if !(model.drift() > 0.0) {
            return Err(Error::InvalidModel(vec!["drift must be > 0".into()]));
        }
        match (engine, model.params()) {
            (Engine::ClosedFormBrownian, ModelParams::Brownian(p)) if p.c >= 0.0 => {}
            (Engine::MittagLefflerTS, ModelParams::TemperedStable(_)) if q == 0.0 => {}
            (Engine::NumericInversion, _) => {}
            _ => {
                return Err(Error::Unsupported(format!(
                    "engine {engine} does not apply to {} with q = {q}",
                    model.describe()
                )))
            }
        }
        if let ModelParams::TemperedStable(p) = model.params() {
            if !(p.phi > 0.0 && p.gamma > 0.0 && p.nu > 0.0 && p.nu < 1.0) {
                return Err(Error::InvalidModel(model.validate()));
            }
        }
        let phi_q = model.phi_inverse(q)?;
        Ok(Self {
            model: model.clone(),
            q,
            engine,
            inversion: InversionSpec::default(),
            phi_q,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_inversion(mut self, spec: InversionSpec) -> Self {
        self.inversion = spec;
        self.memo = RwLock::new(HashMap::new());
        self
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    /// `Φ(q)`, the exponential growth rate of `W^{(q)}`.
    pub fn phi_q(&self) -> f64 {
        self.phi_q
    }

    /// Exponent of the `x^κ` behaviour of `W(x) - W(0)` at the origin.
    pub fn kink_exponent(&self) -> f64 {
        match self.model.params() {
            ModelParams::TemperedStable(p) => p.nu,
            _ => 0.5,
        }
    }

    /// `ln W^{(q)}(x)`; `-∞` for `x < 0`.
    pub fn ln_eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("scale function argument is NaN".into()));
        }
        if x < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if x == 0.0 {
            return Ok(-self.model.drift().ln());
        }
        let key = x.to_bits();
        if let Some(v) = self.memo.read().ok().and_then(|m| m.get(&key).copied()) {
            return Ok(v);
        }
        let v = self.compute_ln(x)?;
        if let Ok(mut m) = self.memo.write() {
            m.insert(key, v);
        }
        Ok(v)
    }

    fn compute_ln(&self, x: f64) -> Result<f64> {
        match (self.engine, self.model.params()) {
            (Engine::ClosedFormBrownian, ModelParams::Brownian(p)) => ln_w_brownian(x, self.q, p.c),
            (Engine::MittagLefflerTS, ModelParams::TemperedStable(p)) => ln_w_tempered_stable(x, p),
            _ => {
                let model = &self.model;
                let q = self.q;
                let damped = laplace_invert_damped(
                    |s: Complex64| 1.0 / (model.psi_complex(s) - q),
                    x,
                    self.phi_q,
                    &self.inversion,
                )?;
                if !(damped > 0.0) {
                    return Err(Error::Domain(format!(
                        "numeric inversion gave non-positive W({x}) = {damped:e}"
                    )));
                }
                Ok(self.phi_q * x + damped.ln())
            }
        }
    }

    /// `W^{(q)}(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let l = self.ln_eval(x)?;
        let v = l.exp();
        if v.is_infinite() {
            return Err(Error::Overflow(format!("W^({})({x}) exceeds the f64 range", self.q)));
        }
        Ok(v)
    }

    /// `e^{-βx} W^{(q)}(x)`, formed in the log domain.
    pub fn tilted(&self, x: f64, beta: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        Ok((self.ln_eval(x)? - beta * x).exp())
    }

    /// `∫_0^x e^{-βy} W^{(q)}(y) dy`.
    pub fn integral(&self, x: f64, beta: f64) -> Result<f64> {
        check_x(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let kink = self.kink_exponent();
        let mut err = None;
        let v = integrate_left_singular(
            |y| match self.ln_eval(y) {
                Ok(l) => (l - beta * y).exp(),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            x,
            kink,
            &law_quadrature(),
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// `∫_0^x e^{-βy} W(y) dy / (e^{-βx} W(x))`, bounded where numerator and
    /// denominator overflow separately.
    pub fn integral_ratio(&self, x: f64, beta: f64) -> Result<f64> {
        check_x(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let top = self.ln_eval(x)?;
        let kink = self.kink_exponent();
        let mut err = None;
        let v = integrate_left_singular(
            |y| match self.ln_eval(y) {
                Ok(l) => (l - top + beta * (x - y)).exp(),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            x,
            kink,
            &law_quadrature(),
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// `∫_0^∞ e^{-θx} W^{(q)}(x) dx` by quadrature, for `θ > Φ(q)`. The range
    /// is cut where `e^{-(θ-Φ(q))x}` drops below `e^{-60}`.
    pub fn laplace_transform(&self, theta: f64) -> Result<f64> {
        if !(theta > self.phi_q) || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "Laplace transform of W^({}) needs theta > Phi(q) = {}, got {theta}",
                self.q, self.phi_q
            )));
        }
        let cut = 1.0 + 60.0 / (theta - self.phi_q);
        self.integral(cut, theta)
    }

    /// Tabulates `W^{(q)}` on an increasing grid. Numeric-inversion values are
    /// passed through a running maximum; a clamp above [`MAX_CLAMP`] (relative)
    /// is an error.
    pub fn table(&self, grid: &[f64]) -> Result<ScaleTable> {
        if grid.is_empty() {
            return Err(Error::Domain("empty grid".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
            return Err(Error::Domain("grid must be increasing and start at x >= 0".into()));
        }
        let mut values = Vec::with_capacity(grid.len());
        for &x in grid {
            values.push(self.eval(x)?);
        }
        let max_clamp = monotone_clamp(&mut values);
        if max_clamp > MAX_CLAMP {
            return Err(Error::MonotonicityLost(max_clamp));
        }
        let interp = if grid.len() >= 2 {
            Some(Pchip::new(grid.to_vec(), values.clone())?)
        } else {
            None
        };
        Ok(ScaleTable {
            xs: grid.to_vec(),
            values,
            engine: self.engine,
            max_clamp,
            interp,
        })
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("expected finite x >= 0, got {x}")))
    }
}

/// Replaces `values` by their running maximum, returning the largest relative
/// lift applied.
pub fn monotone_clamp(values: &mut [f64]) -> f64 {
    let mut top = f64::NEG_INFINITY;
    let mut worst = 0.0_f64;
    for v in values.iter_mut() {
        if *v < top {
            worst = worst.max((top - *v) / top.abs().max(f64::MIN_POSITIVE));
            *v = top;
        } else {
            top = *v;
        }
    }
    worst
}

/// `W^{(q)}` on a grid, with monotone cubic interpolation between nodes.
#[derive(Debug, Clone)]
pub struct ScaleTable {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub engine: Engine,
    pub max_clamp: f64,
    interp: Option<Pchip>,
}

impl ScaleTable {
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.xs[0], self.xs[self.xs.len() - 1]);
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain(format!("x = {x} outside the table range [{lo}, {hi}]")));
        }
        Ok(match &self.interp {
            Some(p) => p.eval(x),
            None => self.values[0],
        })
    }
}

/// `W^{(α)}(x)` for the Brownian model with drift `-c`.
pub fn w_brownian(x: f64, alpha: f64, c: f64) -> Result<f64> {
    Ok(ln_w_brownian(x, alpha, c)?.exp())
}

/// Two-root form only: reports [`Error::DegenerateRoots`] at `c = 1, α = 0`
/// instead of switching to the limit.
pub fn w_brownian_two_root(x: f64, alpha: f64, c: f64) -> Result<f64> {
    check_brownian(x, alpha, c)?;
    let d2 = (1.0 - c) * (1.0 - c) + 2.0 * alpha;
    if d2 == 0.0 {
        return Err(Error::DegenerateRoots { c, alpha });
    }
    Ok(ln_w_brownian(x, alpha, c)?.exp())
}

fn check_brownian(x: f64, alpha: f64, c: f64) -> Result<()> {
    if !(x >= 0.0) || !(alpha >= 0.0) || !(c >= 0.0) || !x.is_finite() || !alpha.is_finite() || !c.is_finite() {
        return Err(Error::Domain(format!(
            "Brownian W needs x, alpha, c >= 0, got x={x}, alpha={alpha}, c={c}"
        )));
    }
    Ok(())
}

/// `ln W^{(α)}(x)`, Brownian model.
///
/// With `λ_{1,2} = 1 ± D`, `D = √((1-c)² + 2α)`, `s = √(x/2)`:
/// `W = e^{-c²x/2} (λ1 erfcx(-λ1 s) - λ2 erfcx(-λ2 s)) / (λ1 - λ2)`.
pub fn ln_w_brownian(x: f64, alpha: f64, c: f64) -> Result<f64> {
    check_brownian(x, alpha, c)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let d2 = (1.0 - c) * (1.0 - c) + 2.0 * alpha;
    if d2 == 0.0 {
        return Ok(w_unit_drift(x).ln());
    }
    let d = d2.sqrt();
    let (l1, l2) = (1.0 + d, 1.0 - d);
    let s = (0.5 * x).sqrt();
    let e1 = ln_erfcx(-l1 * s);
    let e2 = ln_erfcx(-l2 * s);
    let ratio = (l2 / l1) * (e2 - e1).exp();
    Ok(-0.5 * c * c * x - (2.0 * d).ln() + l1.ln() + e1 + (-ratio).ln_1p())
}

/// `c = 1, α = 0`: `(1+x) erfc(-√(x/2)) + √(2x/π) e^{-x/2}`.
fn w_unit_drift(x: f64) -> f64 {
    (1.0 + x) * erfc(-(0.5 * x).sqrt()) + (2.0 * x / std::f64::consts::PI).sqrt() * (-0.5 * x).exp()
}

/// `ln W(x)` for the tempered-stable model:
/// `W(x) = e^{φx} (1 + γ^ν ∫_0^x e^{-(γ+φ)y} y^{ν-1} E_{ν,ν}(γ^ν y^ν) dy)`.
fn ln_w_tempered_stable(x: f64, p: &TemperedStableParams) -> Result<f64> {
    let j = ts_integral(x, p)?;
    Ok(p.phi * x + (p.gamma.powf(p.nu) * j).ln_1p())
}

/// The integral in the tempered-stable `W`; `e^{-γy}` is absorbed into the
/// scaled Mittag-Leffler function so nothing overflows.
fn ts_integral(x: f64, p: &TemperedStableParams) -> Result<f64> {
    let g_nu = p.gamma.powf(p.nu);
    let mut err = None;
    let v = integrate_left_singular(
        |y| {
            let z = g_nu * y.powf(p.nu);
            match mittag_leffler_scaled(p.nu, p.nu, z) {
                Ok(e) => (-p.phi * y).exp() * y.powf(p.nu - 1.0) * e,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        x,
        p.nu,
        &law_quadrature(),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `W(x)` for the tempered-stable model (`q = 0`).
pub fn w_tempered_stable(x: f64, params: &TemperedStableParams) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(ln_w_tempered_stable(x, params)?.exp())
}

/// `W^{(q)}(x)` by transform inversion, for any model.
pub fn w_generic(x: f64, model: &LevyModel, q: f64, spec: &InversionSpec) -> Result<f64> {
    ScaleFunction::with_engine(model, q, Engine::NumericInversion)?
        .with_inversion(*spec)
        .eval(x)
}

/// Tilted scale function `W^{(q)}_β(x) = e^{-βx} W^{(α)}(x)`, `q = α - ψ(β)`.
pub fn w_tilted(x: f64, alpha: f64, beta: f64, model: &LevyModel) -> Result<f64> {
    ScaleFunction::new(model, alpha)?.tilted(x, beta)
}

/// `Z^{(q)}_β(x) = 1 + q ∫_0^x W^{(q)}_β(t) dt`.
pub fn z_tilted(x: f64, q: f64, beta: f64, model: &LevyModel) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 || q == 0.0 {
        return Ok(1.0);
    }
    let alpha = q + model.psi(beta)?;
    if alpha < 0.0 {
        return Err(Error::Domain(format!(
            "q + psi(beta) = {alpha} must be >= 0 for the tilted scale function"
        )));
    }
    Ok(1.0 + q * ScaleFunction::new(model, alpha)?.integral(x, beta)?)
}

/// `∂W^{(α)}(x)/∂α` at `α = 0`, which equals the self-convolution
/// `∫_0^x W(y) W(x-y) dy`.
pub fn w_alpha_derivative_at_zero(x: f64, model: &LevyModel) -> Result<f64> {
    let w = ScaleFunction::new(model, 0.0)?;
    self_convolution(&w, x)
}

pub(crate) fn self_convolution(w: &ScaleFunction, x: f64) -> Result<f64> {
    check_x(x)?;
    // failures inside the integrand surface as NaN and are reported below
    let f = |y: f64| w.eval(y).unwrap_or(f64::NAN);
    let v = convolve(f, f, x, &law_quadrature())?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("scale function failed inside the convolution at x = {x}")));
    }
    Ok(v)
}

/// Convolution powers `W^{*k}`, `k = 1..=k_max`, tabulated on `[0, x_max]`
/// by repeated quadrature. Nodes are uniform in `√x`, which resolves the
/// square-root behaviour of `W` at the origin.
#[derive(Debug, Clone)]
pub struct ConvolutionPowers {
    tables: Vec<Pchip>,
    x_max: f64,
}

impl ConvolutionPowers {
    pub fn new(w: &ScaleFunction, x_max: f64, k_max: usize, nodes: usize) -> Result<Self> {
        if !(x_max > 0.0) || k_max < 1 || nodes < 3 {
            return Err(Error::Domain("convolution powers need x_max > 0, k_max >= 1, nodes >= 3".into()));
        }
        let su = x_max.sqrt();
        let us: Vec<f64> = (0..nodes).map(|j| su * j as f64 / (nodes - 1) as f64).collect();
        let xs: Vec<f64> = us.iter().map(|u| u * u).collect();
        let first: Vec<f64> = xs.iter().map(|&x| w.eval(x)).collect::<Result<_>>()?;
        let mut tables = vec![Pchip::new(us.clone(), first)?];
        let spec = law_quadrature();
        for _ in 1..k_max {
            let prev = tables.last().expect("non-empty").clone();
            let mut vals = Vec::with_capacity(nodes);
            for &x in &xs {
                let v = convolve(
                    |y: f64| prev.eval(y.max(0.0).sqrt()),
                    |y: f64| w.eval(y.max(0.0)).unwrap_or(f64::NAN),
                    x,
                    &spec,
                )?;
                if !v.is_finite() {
                    return Err(Error::Domain(format!("convolution power failed at x = {x}")));
                }
                vals.push(v);
            }
            tables.push(Pchip::new(us.clone(), vals)?);
        }
        Ok(Self { tables, x_max })
    }

    /// `W^{*k}(x)`, `1 ≤ k ≤ k_max`.
    pub fn power(&self, k: usize, x: f64) -> Result<f64> {
        if k == 0 || k > self.tables.len() {
            return Err(Error::Domain(format!("power {k} outside 1..={}", self.tables.len())));
        }
        if !(x >= 0.0 && x <= self.x_max) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.x_max)));
        }
        Ok(self.tables[k - 1].eval(x.sqrt()))
    }

    /// Truncated series `Σ_{k=0}^{K} α^k W^{*(k+1)}(x)`.
    pub fn series(&self, alpha: f64, x: f64, terms: usize) -> Result<f64> {
        let mut sum = 0.0;
        let mut a = 1.0;
        for k in 0..=terms {
            sum += a * self.power(k + 1, x)?;
            a *= alpha;
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // mpmath reference values, tests/oracles/generate.py
    #[test]
    fn brownian_reference_values() {
        assert_relative_eq!(w_brownian(2.0, 0.3, 0.5).unwrap(), 65.018_213_807_948_686, max_relative = 1e-13);
        assert_relative_eq!(w_brownian(1.0, 0.0, 0.5).unwrap(), 6.918_580_620_445_093_8, max_relative = 1e-13);
        assert_relative_eq!(w_brownian(1.0, 0.0, 0.0).unwrap(), 14.441_908_195_414_959, max_relative = 1e-13);
        // c = 0: e^{2x} erfc(-√(2x))
        let x = 1.0_f64;
        assert_relative_eq!(
            w_brownian(x, 0.0, 0.0).unwrap(),
            (2.0 * x).exp() * erfc(-(2.0 * x).sqrt()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn brownian_origin_and_large_x() {
        for c in [0.0, 0.3, 1.0, 1.7] {
            for a in [0.0, 0.1, 2.0] {
                assert_eq!(w_brownian(0.0, a, c).unwrap(), 1.0);
            }
        }
        // far past where the naive product overflows
        let l = ln_w_brownian(2000.0, 1.0, 0.5).unwrap();
        let phi = LevyModel::brownian(0.5).phi_inverse(1.0).unwrap();
        assert!(l.is_finite());
        assert_relative_eq!(l / 2000.0, phi, max_relative = 1e-3);
    }

    #[test]
    fn degenerate_roots() {
        assert!(matches!(w_brownian_two_root(1.0, 0.0, 1.0), Err(Error::DegenerateRoots { .. })));
        let w1 = w_brownian(1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(w1, w_unit_drift(1.0), max_relative = 1e-15);
        assert_eq!(w_brownian(0.0, 0.0, 1.0).unwrap(), 1.0);
        // the two-root form approaches the limit
        for x in [0.5, 1.0, 3.0] {
            let near = w_brownian(x, 0.0, 1.0 - 1e-4).unwrap();
            assert_relative_eq!(near, w_unit_drift(x), max_relative = 1e-3);
        }
    }

    #[test]
    fn tempered_stable_reference_values() {
        let p = TemperedStableParams {
            phi: 1.0,
            gamma: 2.0,
            nu: 0.5,
        };
        assert_eq!(w_tempered_stable(0.0, &p).unwrap(), 1.0);
        assert_relative_eq!(w_tempered_stable(0.5, &p).unwrap(), 4.963_022_165_281_228_3, max_relative = 1e-9);
        assert_relative_eq!(w_tempered_stable(1.0, &p).unwrap(), 10.808_995_159_547_099, max_relative = 1e-9);
        assert_relative_eq!(w_tempered_stable(3.0, &p).unwrap(), 105.455_904_614_857_0, max_relative = 1e-9);
    }

    #[test]
    fn tempered_stable_growth_constant() {
        let m = LevyModel::tempered_stable(1.0, 2.0, 0.5);
        let w = ScaleFunction::new(&m, 0.0).unwrap();
        let x = 30.0;
        let ratio = (w.ln_eval(x).unwrap() - x).exp();
        let want = 1.0 / m.psi_prime(1.0).unwrap();
        assert_relative_eq!(ratio, want, max_relative = 1e-3);
    }

    #[test]
    fn engines_agree() {
        let m = LevyModel::brownian(0.5);
        for q in [0.0, 0.3] {
            let closed = ScaleFunction::new(&m, q).unwrap();
            let numeric = ScaleFunction::with_engine(&m, q, Engine::NumericInversion).unwrap();
            for x in [0.05, 1.0, 2.0, 7.0] {
                assert_relative_eq!(closed.eval(x).unwrap(), numeric.eval(x).unwrap(), max_relative = 1e-8);
            }
        }
        let v = w_generic(1.0, &m, 0.0, &InversionSpec::default()).unwrap();
        assert_relative_eq!(v, 6.918_580_620_445_093_8, max_relative = 1e-8);
    }

    #[test]
    fn engine_selection_and_rejection() {
        let b = LevyModel::brownian(0.5);
        let t = LevyModel::tempered_stable(1.0, 2.0, 0.5);
        assert_eq!(ScaleFunction::new(&b, 0.4).unwrap().engine(), Engine::ClosedFormBrownian);
        assert_eq!(ScaleFunction::new(&t, 0.0).unwrap().engine(), Engine::MittagLefflerTS);
        assert_eq!(ScaleFunction::new(&t, 0.2).unwrap().engine(), Engine::NumericInversion);
        assert!(ScaleFunction::with_engine(&t, 0.0, Engine::ClosedFormBrownian).is_err());
        assert!(ScaleFunction::with_engine(&t, 0.5, Engine::MittagLefflerTS).is_err());
        assert!(ScaleFunction::new(&b, -1.0).is_err());
    }

    #[test]
    fn below_zero_and_at_zero() {
        let w = ScaleFunction::new(&LevyModel::brownian(0.5), 0.2).unwrap();
        assert_eq!(w.eval(-1.0).unwrap(), 0.0);
        assert_eq!(w.eval(0.0).unwrap(), 1.0);
        assert_eq!(w.tilted(0.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn tilted_and_z() {
        let m = LevyModel::brownian(0.5);
        let w = w_brownian(1.0, 0.2, 0.5).unwrap();
        assert_relative_eq!(w_tilted(1.0, 0.2, 0.1, &m).unwrap(), (-0.1_f64).exp() * w, max_relative = 1e-14);
        assert_relative_eq!(w_tilted(1.0, 0.2, 0.0, &m).unwrap(), w, max_relative = 1e-14);
        assert_eq!(z_tilted(0.0, 0.2, 0.0, &m).unwrap(), 1.0);
        assert_eq!(z_tilted(3.0, 0.0, 0.4, &m).unwrap(), 1.0);
        let z = z_tilted(1.0, 0.2, 0.0, &m).unwrap();
        let direct = crate::special_fns::quadrature::integrate(
            |y| w_brownian(y, 0.2, 0.5).unwrap(),
            0.0,
            1.0,
            &QuadratureSpec::precise(),
        )
        .unwrap();
        assert_relative_eq!(z, 1.0 + 0.2 * direct, max_relative = 1e-10);
    }

    #[test]
    fn integral_ratio_matches_plain_form() {
        let w = ScaleFunction::new(&LevyModel::brownian(0.5), 0.2).unwrap();
        for (x, b) in [(0.5, 0.0), (2.0, 0.3), (4.0, 1.5)] {
            let plain = w.integral(x, b).unwrap() / w.tilted(x, b).unwrap();
            assert_relative_eq!(w.integral_ratio(x, b).unwrap(), plain, max_relative = 1e-10);
        }
    }

    #[test]
    fn self_convolution_reference() {
        let m = LevyModel::brownian(0.5);
        assert_eq!(w_alpha_derivative_at_zero(0.0, &m).unwrap(), 0.0);
        for (x, want) in [(0.5, 2.607_282_708_272_149_2), (1.0, 11.576_365_792_820_216), (2.0, 83.755_935_823_318_683)] {
            assert_relative_eq!(w_alpha_derivative_at_zero(x, &m).unwrap(), want, max_relative = 1e-9);
        }
    }

    #[test]
    fn table_and_clamp() {
        let w = ScaleFunction::new(&LevyModel::brownian(0.5), 0.0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let t = w.table(&grid).unwrap();
        assert_eq!(t.values[0], 1.0);
        assert_eq!(t.max_clamp, 0.0);
        assert_relative_eq!(t.interpolate(1.05).unwrap(), w.eval(1.05).unwrap(), max_relative = 1e-4);
        assert!(t.interpolate(5.0).is_err());
        assert!(w.table(&[1.0, 0.5]).is_err());
        assert!(w.table(&[-1.0, 0.5]).is_err());

        let mut v = vec![1.0, 2.0, 1.9999, 3.0];
        let lift = monotone_clamp(&mut v);
        assert_eq!(v, vec![1.0, 2.0, 2.0, 3.0]);
        assert_relative_eq!(lift, 5e-5, max_relative = 1e-6);
    }

    #[test]
    fn memo_is_transparent() {
        let w = ScaleFunction::new(&LevyModel::tempered_stable(1.0, 2.0, 0.5), 0.0).unwrap();
        let a = w.eval(1.3).unwrap();
        let b = w.eval(1.3).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = w.clone().eval(1.3).unwrap();
        assert_eq!(a.to_bits(), c.to_bits());
    }
}
