//! Command-line surface: `scale`, `law`, `simulate` and `validate`.
//!
//! Exit statuses: 0 ok, 1 usage, 2 evaluation, 3 infrastructure,
//! 4 validation failed.

mod config;
mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::json;

pub use config::{Args, Command, CustomFamily, FileConfig, Grid, ModelSpec, RunConfig, DEFAULT_SEED};
pub use validate::{run_validation, Check, ValidationReport, ValidationSettings};

use crate::csvio::{fmt_f64, write_table};
use crate::error::Error;
use crate::excursion_laws::{ExcursionLaws, LawKind};
use crate::mc_oracle::{simulate_cycles, write_samples_csv, SimConfig, DEFAULT_EPSILON};
use crate::scale_fn::ScaleFunction;

pub const DEFAULT_SIM_CYCLES: usize = 100_000;
pub const DEFAULT_VALIDATE_CYCLES: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("infrastructure: {0}")]
    Infra(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Eval(_) => 2,
            CliError::Infra(_) => 3,
            CliError::ValidationFailed(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => CliError::Infra(m),
            Error::InvalidModel(_) | Error::Unsupported(_) => CliError::Usage(e.to_string()),
            other => CliError::Eval(other.to_string()),
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Infra(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Runs one command. Tables go to `--out` (or stdout); `simulate` also prints
/// a JSON summary to stdout.
pub fn run(args: &Args) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    match cfg.command {
        Command::Scale => cmd_scale(&cfg),
        Command::Law => cmd_law(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Validate => cmd_validate(&cfg),
    }
}

pub fn cmd_scale(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid.unwrap_or(Grid { a: 0.0, b: 10.0, n: 101 });
    if grid.a < 0.0 {
        return Err(CliError::Usage(format!("scale grid must start at x >= 0, got {}", grid.a)));
    }
    let w = match cfg.engine {
        Some(e) => ScaleFunction::with_engine(&cfg.model, cfg.q, e)?,
        None => ScaleFunction::new(&cfg.model, cfg.q)?,
    };
    let xs = grid.points();
    let table = w.table(&xs)?;
    if table.values.windows(2).any(|v| v[1] < v[0]) {
        return Err(CliError::Eval("tabulated W is not monotone".into()));
    }
    let engine = table.engine.to_string();
    let rows: Vec<Vec<String>> = table
        .xs
        .iter()
        .zip(&table.values)
        .map(|(x, v)| vec![fmt_f64(*x), fmt_f64(*v), engine.clone()])
        .collect();
    let prov = [
        ("command", "scale".to_string()),
        ("model", cfg.model.describe()),
        ("q", fmt_f64(cfg.q)),
        ("engine", engine.clone()),
        ("max_clamp", fmt_f64(table.max_clamp)),
        ("version", version()),
    ];
    write_table(open_out(cfg.out.as_deref())?, &prov, &["x", "W_q", "engine"], &rows)?;
    Ok(())
}

fn default_vary(law: LawKind) -> &'static str {
    match law {
        LawKind::BusyLT | LawKind::JointBI | LawKind::BusyEndpointsLT | LawKind::IdleEndpointsLT => "alpha",
        LawKind::IdleLT => "beta",
        _ => "x",
    }
}

pub fn cmd_law(cfg: &RunConfig) -> Result<(), CliError> {
    let name = cfg
        .law
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("law needs --law, one of: {}", LawKind::NAMES.join(", "))))?;
    let law = LawKind::parse(name).map_err(|e| CliError::Usage(e.to_string()))?;
    let laws = ExcursionLaws::new(&cfg.model)?;
    let vary = cfg.vary.as_deref().unwrap_or(default_vary(law));
    let x0 = cfg.x.unwrap_or(f64::INFINITY);
    let points: Vec<(f64, f64, f64)> = match (cfg.grid, vary) {
        (None, _) => vec![(cfg.alpha, cfg.beta, x0)],
        (Some(g), "x") => g.points().into_iter().map(|x| (cfg.alpha, cfg.beta, x)).collect(),
        (Some(g), "alpha") => g.points().into_iter().map(|a| (a, cfg.beta, x0)).collect(),
        (Some(g), "beta") => g.points().into_iter().map(|b| (cfg.alpha, b, x0)).collect(),
        (Some(_), other) => return Err(CliError::Usage(format!("--vary must be x, alpha or beta, got {other:?}"))),
    };
    let id = law.formula_id();
    let mut rows = Vec::with_capacity(points.len());
    for (a, b, x) in points {
        let v = laws
            .evaluate_at(law, a, b, x, cfg.y)
            .map_err(|e| CliError::Eval(format!("{id} at alpha={a}, beta={b}, x={x}, y={}: {e}", cfg.y)))?;
        rows.push(vec![fmt_f64(a), fmt_f64(b), fmt_f64(x), fmt_f64(cfg.y), fmt_f64(v), id.to_string()]);
    }
    let prov = [
        ("command", "law".to_string()),
        ("model", cfg.model.describe()),
        ("law", id.to_string()),
        ("formula", law.formula().to_string()),
        ("version", version()),
    ];
    write_table(
        open_out(cfg.out.as_deref())?,
        &prov,
        &["alpha", "beta", "x", "y", "value", "formula"],
        &rows,
    )?;
    Ok(())
}

fn sim_config(cfg: &RunConfig, default_cycles: usize) -> SimConfig {
    let mut sc = SimConfig::new(cfg.model.clone(), cfg.cycles.unwrap_or(default_cycles), cfg.seed)
        .with_epsilon(cfg.epsilon.unwrap_or(DEFAULT_EPSILON));
    if let Some(w) = cfg.workers {
        sc = sc.with_workers(w);
    }
    sc
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let sc = sim_config(cfg, DEFAULT_SIM_CYCLES);
    let stats = simulate_cycles(&sc)?;
    if let Some(p) = &cfg.out {
        write_samples_csv(open_out(Some(p))?, &stats)?;
    }
    let laws = ExcursionLaws::new(&cfg.model)?;
    let summary = json!({
        "provenance": stats.provenance,
        "completed": stats.len(),
        "censored": stats.censored,
        "total_jumps": stats.total_jumps,
        "mean_b": stats.mean_b()?,
        "mean_i": stats.mean_i()?,
        "mean_q_star": stats.mean_q_star()?,
        "cycle_rate": stats.cycle_rate()?,
        "analytic": {
            "mean_b": laws.busy_mean(),
            "mean_i": laws.idle_mean(),
            "cycle_rate": laws.cycle_rate(),
        },
    });
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &summary).map_err(|e| CliError::Infra(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Infra(e.to_string()))?;
    Ok(())
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let settings = ValidationSettings {
        sim: sim_config(cfg, DEFAULT_VALIDATE_CYCLES),
    };
    let report = run_validation(&cfg.model, &settings)?;
    let mut out = open_out(cfg.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::Infra(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::Infra(e.to_string()))?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(CliError::ValidationFailed(failed.join(", ")))
    }
}
