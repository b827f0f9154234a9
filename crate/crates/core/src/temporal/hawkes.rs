//! Self-exciting (Hawkes) process: conditional intensity, branching
//! structure and Ogata thinning simulation for the exponential kernel.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;
use crate::types::EventTimes;

/// Memory kernel `phi(x)` for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `alpha * exp(-beta x)`
    Exponential { alpha: f64, beta: f64 },
    /// `alpha / (x + delta)^(eta + 1)`
    PowerLaw { alpha: f64, delta: f64, eta: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Kernel::Exponential { alpha, beta } => alpha * (-beta * x).exp(),
            Kernel::PowerLaw { alpha, delta, eta } => alpha / (x + delta).powf(eta + 1.0),
        }
    }

    /// `integral_0^inf phi(x) dx`.
    pub fn integral(&self) -> f64 {
        match *self {
            Kernel::Exponential { alpha, beta } => alpha / beta,
            Kernel::PowerLaw { alpha, delta, eta } => alpha / (eta * delta.powf(eta)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HawkesModel {
    mu: f64,
    kernel: Kernel,
}

impl HawkesModel {
    pub fn new(mu: f64, kernel: Kernel) -> Result<Self> {
        ensure(mu.is_finite() && mu >= 0.0, || {
            format!("baseline mu must be >= 0, got {mu}")
        })?;
        match kernel {
            Kernel::Exponential { alpha, beta } => {
                ensure(alpha.is_finite() && alpha >= 0.0, || {
                    format!("alpha must be >= 0, got {alpha}")
                })?;
                ensure(beta.is_finite() && beta > 0.0, || {
                    format!("beta must be > 0, got {beta}")
                })?;
            }
            Kernel::PowerLaw { alpha, delta, eta } => {
                ensure(alpha.is_finite() && alpha >= 0.0, || {
                    format!("alpha must be >= 0, got {alpha}")
                })?;
                ensure(delta.is_finite() && delta > 0.0, || {
                    format!("delta must be > 0, got {delta}")
                })?;
                ensure(eta.is_finite() && eta > 0.0, || {
                    format!("eta must be > 0, got {eta}")
                })?;
            }
        }
        Ok(Self { mu, kernel })
    }

    pub fn exponential(mu: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(mu, Kernel::Exponential { alpha, beta })
    }

    pub fn power_law(mu: f64, alpha: f64, delta: f64, eta: f64) -> Result<Self> {
        Self::new(mu, Kernel::PowerLaw { alpha, delta, eta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

/// Expected direct offspring per event and the regime it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branching {
    pub n_star: f64,
    pub regime: Regime,
}

pub fn branching_factor(model: &HawkesModel) -> Branching {
    let n_star = model.kernel.integral();
    let regime = if n_star < 1.0 {
        Regime::Subcritical
    } else if n_star > 1.0 {
        Regime::Supercritical
    } else {
        Regime::Critical
    };
    Branching { n_star, regime }
}

/// Mean cluster size per immigrant, `sum_i (n*)^i = 1 / (1 - n*)`.
pub fn expected_cluster_size(n_star: f64) -> Result<f64> {
    ensure(n_star.is_finite() && n_star >= 0.0, || {
        format!("branching factor must be >= 0, got {n_star}")
    })?;
    if n_star >= 1.0 {
        return Err(Error::UnboundedRegime(n_star));
    }
    Ok(1.0 / (1.0 - n_star))
}

/// Conditional intensity at `t` from events strictly before `t` (left limit).
///
/// `history` is an ascending list of event times, e.g. [`EventTimes::times`].
pub fn hawkes_intensity(model: &HawkesModel, history: &[f64], t: f64) -> f64 {
    let past = &history[..history.partition_point(|&ti| ti < t)];
    model.mu + past.iter().map(|&ti| model.kernel.eval(t - ti)).sum::<f64>()
}

/// Intensity just after `t`, counting an event at exactly `t`.
pub fn hawkes_intensity_after(model: &HawkesModel, history: &[f64], t: f64) -> f64 {
    let past = &history[..history.partition_point(|&ti| ti <= t)];
    model.mu + past.iter().map(|&ti| model.kernel.eval(t - ti)).sum::<f64>()
}

/// Simulated path plus the model's branching diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesSimulation {
    pub events: EventTimes,
    pub branching: Branching,
}

impl HawkesSimulation {
    /// Warning text for non-subcritical models; the run itself is still valid
    /// because the horizon is finite.
    pub fn warning(&self) -> Option<String> {
        match self.branching.regime {
            Regime::Subcritical => None,
            regime => Some(format!(
                "branching factor n* = {} ({regime}): the number of triggered events is unbounded; \
                 simulating on the finite horizon anyway",
                self.branching.n_star
            )),
        }
    }
}

/// Ogata thinning for the exponential kernel.
///
/// The dominating rate at each step is the intensity just after the current
/// time, `lambda(s+)`, which includes the contribution of an event accepted at
/// `s`. Between events the exponential kernel only decays, so the intensity at
/// the candidate never exceeds that bound. A candidate at `s` is accepted when
/// `D * lambda_hat <= lambda(s)`.
pub fn simulate_hawkes(model: &HawkesModel, horizon: f64, rng: &mut RngStream) -> Result<HawkesSimulation> {
    let (alpha, beta) = match model.kernel {
        Kernel::Exponential { alpha, beta } => (alpha, beta),
        Kernel::PowerLaw { .. } => {
            return Err(Error::UnsupportedKernel(
                "power-law kernel has no thinning envelope; use the exponential kernel",
            ))
        }
    };
    ensure(model.mu > 0.0, || {
        format!("simulation needs mu > 0, got {}", model.mu)
    })?;
    ensure(horizon.is_finite() && horizon > 0.0, || {
        format!("horizon must be positive, got {horizon}")
    })?;

    let mut times: Vec<f64> = Vec::new();
    let mut s = 0.0;
    // sum of alpha * exp(-beta (s - tau)) over accepted tau <= s
    let mut excitation = 0.0;
    loop {
        let lambda_hat = model.mu + excitation;
        let gap = rng.exp_unchecked(lambda_hat);
        let next = s + gap;
        if next > horizon {
            break;
        }
        excitation *= (-beta * gap).exp();
        let lambda_next = model.mu + excitation;
        if lambda_next > lambda_hat {
            return Err(Error::Envelope {
                t: next,
                value: lambda_next,
                bound: lambda_hat,
            });
        }
        let d = rng.uniform();
        if d * lambda_hat <= lambda_next && times.last().is_none_or(|&last| next > last) {
            times.push(next);
            excitation += alpha;
        }
        s = next;
    }

    Ok(HawkesSimulation {
        events: EventTimes::from_sorted_unchecked(times, horizon),
        branching: branching_factor(model),
    })
}
