//! Monte Carlo oracle: i.i.d. cycles `(B, I, Q*)` of `Λ_t = t − L⁻¹_t`.
//!
//! Between jumps `Λ` rises linearly, so first passage below zero happens at a
//! jump and the only bias comes from truncating jumps below `ε`.

mod estimators;
mod jumps;
mod samples;

use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{LevyModel, ModelParams};

pub use estimators::{ks_distance, tabulate_cdf, Estimate, LengthBiased};
pub use jumps::JumpSampler;
pub use samples::{read_samples_csv, write_samples_csv};

/// Events per cycle after which the cycle is censored.
pub const DEFAULT_MAX_EVENTS: u64 = 1_000_000;
/// Threshold used when none is given; keeps `∫_0^ε u²Π(du)` under 1e-8 for
/// the built-in models.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Share of censored cycles above which a run is not fit for validation.
pub const MAX_CENSORED_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: LevyModel,
    pub n_cycles: usize,
    pub jump_threshold: f64,
    pub seed: u64,
    pub workers: usize,
    pub max_events: u64,
}

impl SimConfig {
    pub fn new(model: LevyModel, n_cycles: usize, seed: u64) -> Self {
        Self {
            model,
            n_cycles,
            jump_threshold: DEFAULT_EPSILON,
            seed,
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.jump_threshold = eps;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = max_events;
        self
    }

    fn check(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_cycles == 0 {
            bad.push("n_cycles must be >= 1".to_string());
        }
        if self.workers == 0 {
            bad.push("workers must be >= 1".to_string());
        }
        if self.max_events == 0 {
            bad.push("max_events must be >= 1".to_string());
        }
        if !(self.jump_threshold > 0.0) || !self.jump_threshold.is_finite() {
            bad.push(format!("jump threshold must be > 0, got {}", self.jump_threshold));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(bad))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionCycle {
    pub b: f64,
    pub i: f64,
    pub q_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimProvenance {
    pub model: String,
    pub seed: u64,
    pub n_cycles: usize,
    pub epsilon: f64,
    pub workers: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleStats {
    pub samples: Vec<ExcursionCycle>,
    pub censored: usize,
    pub total_jumps: u64,
    pub provenance: SimProvenance,
}

enum Outcome {
    Done(ExcursionCycle, u64),
    Censored(u64),
}

// One cycle started at Λ = 0. Every stream index gives an independent ChaCha
// stream, so the sample for cycle k does not depend on how cycles are split
// between workers.
fn run_cycle<O>(sampler: &JumpSampler, slope: f64, rate: f64, max_events: u64, rng: &mut ChaCha8Rng, observe: &mut O) -> Outcome
where
    O: FnMut(f64, f64, f64),
{
    let mut t = 0.0_f64;
    let mut level = 0.0_f64;
    let mut peak = 0.0_f64;
    let mut events = 0u64;
    loop {
        if events >= max_events {
            return Outcome::Censored(events);
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / rate;
        t += wait;
        level += slope * wait;
        if level > peak {
            peak = level;
        }
        let pre = level;
        level -= sampler.sample(rng);
        observe(t, pre, level);
        events += 1;
        if level < 0.0 {
            return Outcome::Done(
                ExcursionCycle {
                    b: t,
                    i: -level,
                    q_star: peak,
                },
                events,
            );
        }
    }
}

fn prepare(config: &SimConfig) -> Result<(JumpSampler, f64, f64)> {
    config.check()?;
    if matches!(config.model.params(), ModelParams::Custom(_)) {
        return Err(Error::Unsupported(
            "Monte Carlo needs a jump measure; custom models are given by their exponent only".into(),
        ));
    }
    config.model.ensure_valid()?;
    let sampler = JumpSampler::new(&config.model, config.jump_threshold)?;
    let slope = sampler.drift_slope(config.model.drift())?;
    let rate = sampler.rate();
    Ok((sampler, slope, rate))
}

/// One jump of a traced cycle: time, level just before and just after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub pre: f64,
    pub post: f64,
}

/// Replays cycle `index` of `config` and records every jump. Returns `None`
/// for a censored cycle.
pub fn trace_cycle(config: &SimConfig, index: usize) -> Result<Option<(ExcursionCycle, Vec<JumpEvent>)>> {
    let (sampler, slope, rate) = prepare(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let mut path = Vec::new();
    let outcome = run_cycle(&sampler, slope, rate, config.max_events, &mut rng, &mut |t, pre, post| {
        path.push(JumpEvent { t, pre, post })
    });
    Ok(match outcome {
        Outcome::Done(c, _) => Some((c, path)),
        Outcome::Censored(_) => None,
    })
}

/// Simulate `n_cycles` independent cycles under `P_d`.
pub fn simulate_cycles(config: &SimConfig) -> Result<CycleStats> {
    let (sampler, slope, rate) = prepare(config)?;
    let base = ChaCha8Rng::seed_from_u64(config.seed);

    let n = config.n_cycles;
    let workers = config.workers.min(n);
    let chunk = n.div_ceil(workers);
    let run_range = |lo: usize, hi: usize| -> Vec<Outcome> {
        let mut rng = base.clone();
        (lo..hi)
            .map(|k| {
                rng.set_stream(k as u64);
                rng.set_word_pos(0);
                run_cycle(&sampler, slope, rate, config.max_events, &mut rng, &mut |_, _, _| {})
            })
            .collect()
    };
    let parts: Vec<Vec<Outcome>> = if workers == 1 {
        vec![run_range(0, n)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let (lo, hi) = (w * chunk, ((w + 1) * chunk).min(n));
                    let run = &run_range;
                    s.spawn(move || run(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join())
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .map_err(|_| Error::Simulation("worker thread panicked".into()))?
    };

    let mut samples = Vec::with_capacity(n);
    let mut censored = 0;
    let mut total_jumps = 0u64;
    for outcome in parts.into_iter().flatten() {
        match outcome {
            Outcome::Done(c, ev) => {
                debug_assert!(c.b > 0.0 && c.i > 0.0 && c.q_star > 0.0);
                samples.push(c);
                total_jumps += ev;
            }
            Outcome::Censored(ev) => {
                censored += 1;
                total_jumps += ev;
            }
        }
    }
    Ok(CycleStats {
        samples,
        censored,
        total_jumps,
        provenance: SimProvenance {
            model: config.model.describe(),
            seed: config.seed,
            n_cycles: n,
            epsilon: config.jump_threshold,
            workers: config.workers,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

impl CycleStats {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.provenance.n_cycles.max(1) as f64
    }

    fn ensure_nonempty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::Simulation("no completed cycles".into()))
        } else {
            Ok(())
        }
    }

    pub fn mean_b(&self) -> Result<Estimate> {
        self.ensure_nonempty()?;
        Ok(Estimate::sample_mean(self.samples.iter().map(|c| c.b)))
    }

    pub fn mean_i(&self) -> Result<Estimate> {
        self.ensure_nonempty()?;
        Ok(Estimate::sample_mean(self.samples.iter().map(|c| c.i)))
    }

    pub fn max_q_star(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, c| m.max(c.q_star))
    }

    pub fn mean_q_star(&self) -> Result<Estimate> {
        self.ensure_nonempty()?;
        Ok(Estimate::sample_mean(self.samples.iter().map(|c| c.q_star)))
    }

    /// `1/(mean B + mean I)` with a delta-method standard error.
    pub fn cycle_rate(&self) -> Result<Estimate> {
        self.ensure_nonempty()?;
        let m = Estimate::sample_mean(self.samples.iter().map(|c| c.b + c.i));
        Ok(Estimate {
            value: 1.0 / m.value,
            std_error: m.std_error / (m.value * m.value),
        })
    }

    /// Sample mean of `e^{-αB-βI} 1(Q* ≤ x)`.
    pub fn empirical_transform(&self, alpha: f64, beta: f64, x: f64) -> Result<Estimate> {
        self.ensure_nonempty()?;
        Ok(Estimate::sample_mean(self.samples.iter().map(|c| {
            if c.q_star <= x {
                (-alpha * c.b - beta * c.i).exp()
            } else {
                0.0
            }
        })))
    }

    /// Empirical `P_d(Q* ≤ x)`.
    pub fn ecdf_q_star(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return f64::NAN;
        }
        self.samples.iter().filter(|c| c.q_star <= x).count() as f64 / self.samples.len() as f64
    }

    /// Sup-distance between the empirical law of `Q*` and `cdf`.
    pub fn ks_q_star<F>(&self, cdf: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.ensure_nonempty()?;
        let mut pts: Vec<(f64, f64)> = self.samples.iter().map(|c| (c.q_star, 1.0)).collect();
        ks_distance(&mut pts, cdf)
    }

    pub fn length_biased(&self) -> Result<LengthBiased<'_>> {
        self.ensure_nonempty()?;
        Ok(LengthBiased::new(self))
    }
}
