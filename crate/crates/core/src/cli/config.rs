//! Run configuration: a JSON document, overridden flag by flag.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CliError;
use crate::levy_model::{CustomExponent, LevyModel};
use crate::scale_fn::Engine;

#[derive(Debug, Clone, Default, Parser)]
#[command(name = "fluidq", version, about = "Busy-period, idle-period and maximum laws of fluid queues driven by local time")]
pub struct Args {
    /// JSON configuration file; flags override its values
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// e.g. `brownian:c=0.5`, `tempered_stable:phi=1,gamma=2,nu=0.5`,
    /// `custom:family=brownian,c=0.5,drift=0.8`, or a JSON object
    #[arg(long)]
    pub model: Option<String>,
    /// scale | law | simulate | validate
    #[arg(long)]
    pub command: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub cycles: Option<usize>,
    #[arg(long, value_name = "X")]
    pub epsilon: Option<f64>,
    /// a:b:n, n equally spaced points from a to b
    #[arg(long, value_name = "a:b:n", allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    /// which law argument the grid runs over: x | alpha | beta
    #[arg(long)]
    pub vary: Option<String>,
    /// closed-form-brownian | mittag-leffler-ts | numeric-inversion
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelSpec>,
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cycles: Option<usize>,
    pub epsilon: Option<f64>,
    pub grid: Option<String>,
    pub q: Option<f64>,
    pub law: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub vary: Option<String>,
    pub engine: Option<String>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Brownian { c: f64 },
    TemperedStable { phi: f64, gamma: f64, nu: f64 },
    /// A known exponent with an independently declared drift, used to probe
    /// the analytic checks.
    Custom { drift: f64, exponent: CustomFamily },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomFamily {
    Brownian { c: f64 },
    TemperedStable { phi: f64, gamma: f64, nu: f64 },
    /// `ψ(θ) = sθ - λθm/(1 + θm)`: slope `s`, exponential jumps of mean `m`
    /// at rate `λ`.
    ExponentialJumps { slope: f64, rate: f64, mean: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> LevyModel {
        match *self {
            ModelSpec::Brownian { c } => LevyModel::brownian(c),
            ModelSpec::TemperedStable { phi, gamma, nu } => LevyModel::tempered_stable(phi, gamma, nu),
            ModelSpec::Custom { drift, ref exponent } => LevyModel::custom(drift, exponent.exponent()),
        }
    }

    /// Parses `kind:key=value,...` or a JSON object.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad --model JSON: {e}")));
        }
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut fields = Map::new();
        for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key=value in --model, got {kv:?}")))?;
            let v = v.trim();
            let val = match v.parse::<f64>() {
                Ok(n) => Value::from(n),
                Err(_) => Value::from(v),
            };
            fields.insert(k.trim().to_string(), val);
        }
        let kind = kind.trim().replace('-', "_");
        let doc = if kind == "custom" {
            let drift = fields
                .remove("drift")
                .ok_or_else(|| CliError::Usage("custom model needs drift=...".into()))?;
            let mut outer = Map::new();
            outer.insert("kind".into(), Value::from("custom"));
            outer.insert("drift".into(), drift);
            outer.insert("exponent".into(), Value::Object(fields));
            Value::Object(outer)
        } else {
            fields.insert("kind".into(), Value::from(kind));
            Value::Object(fields)
        };
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("bad --model {text:?}: {e}")))
    }
}

impl CustomFamily {
    fn exponent(&self) -> CustomExponent {
        match *self {
            CustomFamily::Brownian { c } => {
                let m = LevyModel::brownian(c);
                CustomExponent::new(format!("brownian c={c}"), move |s| m.psi_complex(s))
            }
            CustomFamily::TemperedStable { phi, gamma, nu } => {
                let m = LevyModel::tempered_stable(phi, gamma, nu);
                CustomExponent::new(format!("tempered-stable phi={phi} gamma={gamma} nu={nu}"), move |s| m.psi_complex(s))
            }
            CustomFamily::ExponentialJumps { slope, rate, mean } => CustomExponent::new(
                format!("exponential-jumps slope={slope} rate={rate} mean={mean}"),
                move |s: Complex64| slope * s - rate * mean * s / (1.0 + mean * s),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scale,
    Law,
    Simulate,
    Validate,
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scale" => Ok(Command::Scale),
            "law" => Ok(Command::Law),
            "simulate" => Ok(Command::Simulate),
            "validate" => Ok(Command::Validate),
            other => Err(CliError::Usage(format!(
                "unknown command {other:?}, expected scale, law, simulate or validate"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a];
        }
        let step = (self.b - self.a) / (self.n - 1) as f64;
        (0..self.n)
            .map(|k| if k == self.n - 1 { self.b } else { self.a + step * k as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("grid must be a:b:n with a <= b and n >= 1, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !a.is_finite() || !b.is_finite() || n == 0 || a > b || (n > 1 && a == b) {
            return Err(bad());
        }
        Ok(Grid { a, b, n })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub model: LevyModel,
    pub command: Command,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub cycles: Option<usize>,
    pub epsilon: Option<f64>,
    pub grid: Option<Grid>,
    pub q: f64,
    pub law: Option<String>,
    pub alpha: f64,
    pub beta: f64,
    pub x: Option<f64>,
    pub y: f64,
    pub vary: Option<String>,
    pub engine: Option<Engine>,
    pub workers: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 20240611;

fn parse_engine(s: &str) -> Result<Engine, CliError> {
    match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "closed-form-brownian" | "closed-form" => Ok(Engine::ClosedFormBrownian),
        "mittag-leffler-ts" | "mittag-leffler" => Ok(Engine::MittagLefflerTS),
        "numeric-inversion" | "numeric" => Ok(Engine::NumericInversion),
        other => Err(CliError::Usage(format!("unknown engine {other:?}"))),
    }
}

impl RunConfig {
    pub fn resolve(args: &Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let spec = match &args.model {
            Some(m) => ModelSpec::parse(m)?,
            None => file
                .model
                .clone()
                .ok_or_else(|| CliError::Usage("no model given (use --model or the config 'model' block)".into()))?,
        };
        let command: Command = args
            .command
            .as_deref()
            .or(file.command.as_deref())
            .ok_or_else(|| CliError::Usage("no command given (scale, law, simulate or validate)".into()))?
            .parse()?;
        let grid = args.grid.as_deref().or(file.grid.as_deref()).map(str::parse).transpose()?;
        let engine = args.engine.as_deref().or(file.engine.as_deref()).map(parse_engine).transpose()?;
        let cfg = RunConfig {
            model: spec.build(),
            spec,
            command,
            out: args.out.clone().or(file.out),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            cycles: args.cycles.or(file.cycles),
            epsilon: args.epsilon.or(file.epsilon),
            grid,
            q: args.q.or(file.q).unwrap_or(0.0),
            law: args.law.clone().or(file.law),
            alpha: args.alpha.or(file.alpha).unwrap_or(0.0),
            beta: args.beta.or(file.beta).unwrap_or(0.0),
            x: args.x.or(file.x),
            y: args.y.or(file.y).unwrap_or(0.0),
            vary: args.vary.clone().or(file.vary),
            engine,
            workers: args.workers.or(file.workers),
        };
        if cfg.cycles == Some(0) {
            return Err(CliError::Usage("--cycles must be >= 1".into()));
        }
        if cfg.workers == Some(0) {
            return Err(CliError::Usage("--workers must be >= 1".into()));
        }
        if let Some(e) = cfg.epsilon {
            if !(e > 0.0) || !e.is_finite() {
                return Err(CliError::Usage(format!("--epsilon must be > 0, got {e}")));
            }
        }
        // the scale function exists without the stability condition; every
        // other command needs a stable queue
        let problems = cfg.model.validate();
        let fatal: Vec<String> = match cfg.command {
            Command::Scale => problems
                .into_iter()
                .filter(|p| !p.starts_with("c must") && !p.starts_with("psi'(0+)"))
                .collect(),
            _ => problems,
        };
        if !fatal.is_empty() {
            return Err(CliError::Usage(format!("invalid model: {}", fatal.join("; "))));
        }
        Ok(cfg)
    }
}
