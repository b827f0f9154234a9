use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Samples per envelope segment checked at construction, besides endpoints.
pub const ENVELOPE_SAMPLES: usize = 1000;

/// One piece of a piecewise-constant dominating rate: `lambda(t) <= bound`
/// for `t` in `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSegment {
    pub start: f64,
    pub end: f64,
    pub bound: f64,
}

/// Declarative intensity shapes, used to build an [`IntensityFn`] and to
/// record it in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntensitySpec {
    Constant {
        rate: f64,
    },
    /// Rate `rates[i]` on `[breakpoints[i], breakpoints[i + 1])`.
    Piecewise {
        breakpoints: Vec<f64>,
        rates: Vec<f64>,
    },
    /// `base + amplitude * sin(2 pi t / period)`.
    Sinusoid {
        base: f64,
        amplitude: f64,
        period: f64,
        segments: usize,
    },
}

impl IntensitySpec {
    pub fn build(&self, horizon: f64) -> Result<IntensityFn> {
        match self {
            Self::Constant { rate } => IntensityFn::constant(*rate, horizon),
            Self::Piecewise { breakpoints, rates } => IntensityFn::piecewise(breakpoints, rates),
            Self::Sinusoid {
                base,
                amplitude,
                period,
                segments,
            } => IntensityFn::sinusoid(*base, *amplitude, *period, horizon, *segments),
        }
    }
}

/// A time-varying rate `lambda(t) >= 0` on `[0, horizon]` with a
/// piecewise-constant envelope that dominates it.
#[derive(Clone)]
pub struct IntensityFn {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    segments: Vec<EnvelopeSegment>,
}

impl fmt::Debug for IntensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntensityFn")
            .field("segments", &self.segments)
            .finish_non_exhaustive()
    }
}

impl IntensityFn {
    /// Builds an intensity from an arbitrary rate function and envelope.
    ///
    /// Segments must be contiguous and start at 0. Each segment is sampled at
    /// its start, [`ENVELOPE_SAMPLES`] interior points and its end (the last
    /// representable time before the end for non-final segments, since cells
    /// are half-open). A negative or non-finite sample, or one above the
    /// segment bound, fails construction.
    pub fn new<F>(eval: F, segments: Vec<EnvelopeSegment>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ensure(!segments.is_empty(), || "envelope needs at least one segment".into())?;
        ensure(segments[0].start == 0.0, || "envelope must start at t = 0".into())?;
        for (i, seg) in segments.iter().enumerate() {
            ensure(seg.start < seg.end && seg.end.is_finite(), || {
                format!("envelope segment {i} has start >= end")
            })?;
            ensure(seg.bound.is_finite() && seg.bound >= 0.0, || {
                format!("envelope segment {i} has invalid bound {}", seg.bound)
            })?;
            if i > 0 {
                ensure(segments[i - 1].end == seg.start, || {
                    format!("envelope segments {} and {i} are not contiguous", i - 1)
                })?;
            }
        }
        let last = segments.len() - 1;
        for (i, seg) in segments.iter().enumerate() {
            let end = if i == last { seg.end } else { seg.end.next_down() };
            let width = seg.end - seg.start;
            let samples = std::iter::once(seg.start)
                .chain((1..=ENVELOPE_SAMPLES).map(|k| {
                    seg.start + width * k as f64 / (ENVELOPE_SAMPLES + 1) as f64
                }))
                .chain(std::iter::once(end));
            for t in samples {
                let v = eval(t);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Parameter(format!(
                        "intensity must be finite and non-negative, got {v} at t = {t}"
                    )));
                }
                if v > seg.bound {
                    return Err(Error::Envelope {
                        t,
                        value: v,
                        bound: seg.bound,
                    });
                }
            }
        }
        Ok(Self {
            eval: Arc::new(eval),
            segments,
        })
    }

    pub fn constant(rate: f64, horizon: f64) -> Result<Self> {
        ensure(rate.is_finite() && rate >= 0.0, || {
            format!("rate must be non-negative, got {rate}")
        })?;
        ensure(horizon.is_finite() && horizon > 0.0, || {
            format!("horizon must be positive, got {horizon}")
        })?;
        Self::new(
            move |_| rate,
            vec![EnvelopeSegment {
                start: 0.0,
                end: horizon,
                bound: rate,
            }],
        )
    }

    /// Piecewise-constant rate. `breakpoints` starts at 0 and has one more
    /// entry than `rates`; the final breakpoint is the horizon.
    pub fn piecewise(breakpoints: &[f64], rates: &[f64]) -> Result<Self> {
        ensure(breakpoints.len() == rates.len() + 1 && !rates.is_empty(), || {
            format!(
                "piecewise intensity needs len(breakpoints) = len(rates) + 1, got {} and {}",
                breakpoints.len(),
                rates.len()
            )
        })?;
        let segments: Vec<EnvelopeSegment> = breakpoints
            .windows(2)
            .zip(rates)
            .map(|(w, &bound)| EnvelopeSegment {
                start: w[0],
                end: w[1],
                bound,
            })
            .collect();
        let bps = breakpoints.to_vec();
        let rs = rates.to_vec();
        Self::new(
            move |t| {
                let i = bps.partition_point(|&b| b <= t).saturating_sub(1);
                rs[i.min(rs.len() - 1)]
            },
            segments,
        )
    }

    /// `base + amplitude * sin(2 pi t / period)` with an envelope of
    /// `segments` equal pieces, each bounded by the exact maximum of the
    /// sinusoid over that piece.
    pub fn sinusoid(base: f64, amplitude: f64, period: f64, horizon: f64, segments: usize) -> Result<Self> {
        ensure(base.is_finite() && amplitude.is_finite(), || {
            "sinusoid parameters must be finite".into()
        })?;
        ensure(base >= amplitude.abs(), || {
            format!("sinusoid goes negative: base {base} < |amplitude| {}", amplitude.abs())
        })?;
        ensure(period.is_finite() && period > 0.0, || {
            format!("period must be positive, got {period}")
        })?;
        ensure(horizon.is_finite() && horizon > 0.0, || {
            format!("horizon must be positive, got {horizon}")
        })?;
        ensure(segments >= 1, || "need at least one envelope segment".into())?;

        let f = move |t: f64| base + amplitude * (TAU * t / period).sin();
        // first time at which the sine term peaks
        let peak_phase = if amplitude >= 0.0 { 0.25 } else { 0.75 } * period;
        let width = horizon / segments as f64;
        let env = (0..segments)
            .map(|i| {
                let start = i as f64 * width;
                let end = if i + 1 == segments {
                    horizon
                } else {
                    (i + 1) as f64 * width
                };
                let mut bound = f(start).max(f(end));
                let k = ((start - peak_phase) / period).ceil();
                if peak_phase + k * period <= end {
                    bound = base + amplitude.abs();
                }
                // absorb rounding of sin() between the analytic extrema
                bound *= 1.0 + 1e-12;
                EnvelopeSegment { start, end, bound }
            })
            .collect();
        Self::new(f, env)
    }

    #[inline]
    pub fn evaluate(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn segments(&self) -> &[EnvelopeSegment] {
        &self.segments
    }

    /// End of the envelope, the latest time the intensity is defined for.
    pub fn horizon(&self) -> f64 {
        self.segments.last().map(|s| s.end).unwrap_or(0.0)
    }

    pub fn max_bound(&self) -> f64 {
        self.segments.iter().map(|s| s.bound).fold(0.0, f64::max)
    }
}
