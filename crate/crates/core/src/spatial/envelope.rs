use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::neighbours::{check_radii, f_function, g_function, ripleys_k, EdgeCorrection};
use super::simulate_csr;
use crate::error::{ensure, Result};
use crate::rng::RngStream;
use crate::types::{GridSpec, SpatialPattern};

/// Minimum replicate count for an envelope.
pub const MIN_ENVELOPE_SIMULATIONS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeStatistic {
    G,
    F { probe: GridSpec },
    K { correction: EdgeCorrection },
}

/// Evaluates a curve statistic; radii where K is undefined come back as NaN.
pub fn evaluate_statistic(stat: &EnvelopeStatistic, pattern: &SpatialPattern, radii: &[f64]) -> Result<Vec<f64>> {
    match stat {
        EnvelopeStatistic::G => g_function(pattern, radii),
        EnvelopeStatistic::F { probe } => f_function(pattern, probe, radii),
        EnvelopeStatistic::K { correction } => Ok(ripleys_k(pattern, radii, *correction)?
            .into_iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect()),
    }
}

/// Observed curve with pointwise min/max (rank-1) bounds from CSR replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub distances: Vec<f64>,
    pub observed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Pointwise replicate mean.
    pub mean: Vec<f64>,
    pub nsim: usize,
}

impl EnvelopeResult {
    /// Per radius, whether the observed value lies strictly outside the band.
    /// Undefined values never count as escapes.
    pub fn escapes(&self) -> Vec<bool> {
        self.observed
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&o, (&lo, &hi))| o < lo || o > hi)
            .collect()
    }
}

/// Monte Carlo CSR envelope for G, F or K.
///
/// Replicates are CSR patterns at the observed intensity `n / area` on the
/// same region. Each replicate gets its own stream derived from `rng`, and the
/// reduction runs in replicate order, so the result does not depend on the
/// number of worker threads.
pub fn csr_envelope(
    pattern: &SpatialPattern,
    statistic: &EnvelopeStatistic,
    radii: &[f64],
    nsim: usize,
    rng: &mut RngStream,
) -> Result<EnvelopeResult> {
    ensure(nsim >= MIN_ENVELOPE_SIMULATIONS, || {
        format!("envelope needs nsim >= {MIN_ENVELOPE_SIMULATIONS}, got {nsim}")
    })?;
    check_radii(radii)?;
    let observed = evaluate_statistic(statistic, pattern, radii)?;
    let lambda = pattern.intensity();
    let region = *pattern.region();

    let replicates: Vec<Vec<f64>> = rng
        .split(nsim)
        .into_par_iter()
        .map(|mut stream| {
            let sim = simulate_csr(lambda, &region, &mut stream)?;
            evaluate_statistic(statistic, &sim, radii)
        })
        .collect::<Result<_>>()?;

    let m = radii.len();
    let mut lower = vec![f64::NAN; m];
    let mut upper = vec![f64::NAN; m];
    let mut mean = vec![f64::NAN; m];
    for k in 0..m {
        let vals = replicates.iter().map(|r| r[k]).filter(|v| !v.is_nan());
        let (mut lo, mut hi, mut sum, mut cnt) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in vals {
            lo = lo.min(v);
            hi = hi.max(v);
            sum += v;
            cnt += 1;
        }
        if cnt > 0 {
            lower[k] = lo;
            upper[k] = hi;
            mean[k] = sum / cnt as f64;
        }
    }
    Ok(EnvelopeResult {
        distances: radii.to_vec(),
        observed,
        lower,
        upper,
        mean,
        nsim,
    })
}
