//! Sample means, ratio estimators and sup-distances over simulated cycles.

use serde::{Deserialize, Serialize};

use super::CycleStats;
use crate::error::Result;
use crate::special_fns::pchip::Pchip;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Mean and standard error of the mean (Welford).
    pub fn sample_mean(values: impl Iterator<Item = f64>) -> Self {
        let mut n = 0.0;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for v in values {
            n += 1.0;
            let d = v - mean;
            mean += d / n;
            m2 += d * (v - mean);
        }
        let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
        Self {
            value: if n > 0.0 { mean } else { f64::NAN },
            std_error: (var / n).sqrt(),
        }
    }

    /// `Σy/Σx` with the delta-method standard error.
    pub fn ratio(pairs: &[(f64, f64)]) -> Self {
        let n = pairs.len() as f64;
        let sy: f64 = pairs.iter().map(|p| p.0).sum();
        let sx: f64 = pairs.iter().map(|p| p.1).sum();
        let r = sy / sx;
        let resid = Self::sample_mean(pairs.iter().map(|&(y, x)| y - r * x));
        Self {
            value: r,
            std_error: resid.std_error / (sx / n),
        }
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Sup-distance between a weighted empirical law and `cdf`. `points` holds
/// `(value, weight)` and is sorted in place.
pub fn ks_distance<F>(points: &mut [(f64, f64)], mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = points.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    let mut sup = 0.0_f64;
    let mut k = 0;
    while k < points.len() {
        let x = points[k].0;
        let before = cum / total;
        while k < points.len() && points[k].0 == x {
            cum += points[k].1;
            k += 1;
        }
        let f = cdf(x)?;
        sup = sup.max((f - before).abs()).max((f - cum / total).abs());
    }
    Ok(sup)
}

/// `f` on `nodes` points spaced uniformly in `√x` over `[0, x_max]`, as a
/// monotone interpolant. Cheap stand-in for a costly analytic CDF when it is
/// compared against a large sample.
pub fn tabulate_cdf<F>(mut f: F, x_max: f64, nodes: usize) -> Result<Pchip>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = nodes.max(2);
    let xs: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            x_max * t * t
        })
        .collect();
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    Pchip::new(xs, ys)
}

/// Observed ("time-stationary") laws obtained by weighting cycles by their
/// busy or idle length.
#[derive(Debug, Clone, Copy)]
pub struct LengthBiased<'a> {
    stats: &'a CycleStats,
    mean_b: f64,
}

// ∫_0^1 e^{-αuL - β(1-u)L} du, the uniform-position average inside a period
// of length L
fn endpoint_kernel(alpha: f64, beta: f64, len: f64) -> f64 {
    let d = (alpha - beta) * len;
    if d.abs() < 1e-8 {
        (-0.5 * (alpha + beta) * len).exp() * (1.0 + d * d / 24.0)
    } else {
        ((-beta * len).exp() - (-alpha * len).exp()) / d
    }
}

impl<'a> LengthBiased<'a> {
    pub(super) fn new(stats: &'a CycleStats) -> Self {
        let mean_b = stats.samples.iter().map(|c| c.b).sum::<f64>() / stats.samples.len() as f64;
        Self { stats, mean_b }
    }

    /// Weights `B/mean(B)`; they sum to the sample count.
    pub fn weights(&self) -> Vec<f64> {
        self.stats.samples.iter().map(|c| c.b / self.mean_b).collect()
    }

    /// Weighted `P(Q* ≤ x | Q_0 > 0)`.
    pub fn q_star_cdf(&self, x: f64) -> f64 {
        let hit: f64 = self.stats.samples.iter().filter(|c| c.q_star <= x).map(|c| c.b).sum();
        hit / (self.mean_b * self.stats.samples.len() as f64)
    }

    pub fn ks_q_star<F>(&self, cdf: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut pts: Vec<(f64, f64)> = self.stats.samples.iter().map(|c| (c.q_star, c.b)).collect();
        ks_distance(&mut pts, cdf)
    }

    /// Length of the busy period straddling a typical busy instant,
    /// `E[B²]/E[B]`.
    pub fn mean_busy_length(&self) -> Estimate {
        let pairs: Vec<(f64, f64)> = self.stats.samples.iter().map(|c| (c.b * c.b, c.b)).collect();
        Estimate::ratio(&pairs)
    }

    /// Joint transform of the elapsed and residual busy time at a typical busy
    /// instant, restricted to cycles with `Q* ≤ x`.
    pub fn busy_endpoints_max(&self, alpha: f64, beta: f64, x: f64) -> Estimate {
        let pairs: Vec<(f64, f64)> = self
            .stats
            .samples
            .iter()
            .map(|c| {
                let y = if c.q_star <= x {
                    c.b * endpoint_kernel(alpha, beta, c.b)
                } else {
                    0.0
                };
                (y, c.b)
            })
            .collect();
        Estimate::ratio(&pairs)
    }

    /// Joint transform of the elapsed and residual idle time at a typical idle
    /// instant.
    pub fn idle_endpoints(&self, alpha: f64, beta: f64) -> Estimate {
        let pairs: Vec<(f64, f64)> = self
            .stats
            .samples
            .iter()
            .map(|c| (c.i * endpoint_kernel(alpha, beta, c.i), c.i))
            .collect();
        Estimate::ratio(&pairs)
    }
}
