//! Temporal point processes: homogeneous and non-homogeneous Poisson
//! processes and the self-exciting Hawkes process.
//!
//! All simulators draw from a caller-owned [`RngStream`], so the output is a
//! pure function of the seed and the parameters.

mod hawkes;
mod intensity;

pub use hawkes::{
    branching_factor, expected_cluster_size, hawkes_intensity, hawkes_intensity_after,
    simulate_hawkes, Branching, HawkesModel, HawkesSimulation, Kernel, Regime,
};
pub use intensity::{EnvelopeSegment, IntensityFn, IntensitySpec, ENVELOPE_SAMPLES};

use statrs::function::gamma::ln_gamma;

use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;
use crate::types::EventTimes;

/// Probability of exactly `n` events in `(a, b]` for a homogeneous Poisson
/// process with the given rate.
pub fn poisson_count_pmf(rate: f64, a: f64, b: f64, n: u64) -> Result<f64> {
    ensure(rate.is_finite() && rate > 0.0, || {
        format!("rate must be positive, got {rate}")
    })?;
    if !(b > a) || a < 0.0 {
        return Err(Error::Interval { start: a, end: b });
    }
    let m = rate * (b - a);
    let nf = n as f64;
    Ok((nf * m.ln() - ln_gamma(nf + 1.0) - m).exp())
}

/// Homogeneous Poisson process on `(0, horizon]` from cumulative exponential
/// gaps. The first arrival past the horizon is discarded.
pub fn simulate_hpp(rate: f64, horizon: f64, rng: &mut RngStream) -> Result<EventTimes> {
    ensure(rate.is_finite() && rate > 0.0, || {
        format!("rate must be positive, got {rate}")
    })?;
    ensure(horizon.is_finite() && horizon > 0.0, || {
        format!("horizon must be positive, got {horizon}")
    })?;
    let mut times = Vec::with_capacity((rate * horizon * 1.1) as usize + 8);
    let mut t = 0.0;
    loop {
        let next = t + rng.exp_unchecked(rate);
        if next > horizon {
            break;
        }
        // a gap below half an ulp of t would duplicate t
        if next > t {
            times.push(next);
        }
        t = next;
    }
    Ok(EventTimes::from_sorted_unchecked(times, horizon))
}

/// Non-homogeneous Poisson process by piecewise thinning.
///
/// Candidates come from a homogeneous process running at each envelope
/// segment's bound; a candidate at `s` is kept when `D <= lambda(s) / bound`.
/// Crossing a segment boundary restarts the exponential clock at the boundary,
/// which is exact by memorylessness. An intensity above its bound at any
/// candidate aborts the run.
pub fn simulate_nhpp(intensity: &IntensityFn, horizon: f64, rng: &mut RngStream) -> Result<EventTimes> {
    ensure(horizon.is_finite() && horizon > 0.0, || {
        format!("horizon must be positive, got {horizon}")
    })?;
    ensure(horizon <= intensity.horizon(), || {
        format!(
            "envelope covers [0, {}] but horizon is {horizon}",
            intensity.horizon()
        )
    })?;
    let mut times = Vec::new();
    let mut s = 0.0f64;
    for seg in intensity.segments() {
        if seg.start >= horizon {
            break;
        }
        let end = seg.end.min(horizon);
        s = s.max(seg.start);
        if seg.bound == 0.0 {
            continue;
        }
        loop {
            let next = s + rng.exp_unchecked(seg.bound);
            if next >= end && !(next == end && end == horizon) {
                break;
            }
            s = next;
            let value = intensity.evaluate(s);
            if value > seg.bound {
                return Err(Error::Envelope {
                    t: s,
                    value,
                    bound: seg.bound,
                });
            }
            let d = rng.uniform();
            if d <= value / seg.bound && times.last().is_none_or(|&last| s > last) {
                times.push(s);
            }
        }
    }
    Ok(EventTimes::from_sorted_unchecked(times, horizon))
}

/// Expected count `integral of lambda(u) du` over `[t1, t2]`, by adaptive
/// Simpson quadrature run separately on each envelope segment.
pub fn nhpp_mean(intensity: &IntensityFn, t1: f64, t2: f64) -> Result<f64> {
    if !(t2 > t1) {
        return Err(Error::Interval { start: t1, end: t2 });
    }
    ensure(t1 >= 0.0 && t2 <= intensity.horizon(), || {
        format!(
            "interval [{t1}, {t2}] outside the intensity's domain [0, {}]",
            intensity.horizon()
        )
    })?;
    let total_tol = 1e-9 * (t2 - t1) * intensity.max_bound();
    let f = |t: f64| intensity.evaluate(t);
    let mut sum = 0.0;
    for seg in intensity.segments() {
        let a = seg.start.max(t1);
        let b = seg.end.min(t2);
        if b <= a {
            continue;
        }
        let tol = total_tol * (b - a) / (t2 - t1);
        sum += adaptive_simpson(&f, a, b, tol);
    }
    Ok(sum.max(0.0))
}

const SIMPSON_MAX_DEPTH: u32 = 50;

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, TAU};

    #[test]
    fn pmf_examples() {
        let p = poisson_count_pmf(1.0, 0.0, 1.0, 0).unwrap();
        assert!((p - 1.0 / E).abs() < 1e-15);
        let pmfs: Vec<f64> = (0..20)
            .map(|n| poisson_count_pmf(2.0, 0.0, 3.0, n).unwrap())
            .collect();
        let mode = pmfs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(mode == 5 || mode == 6);
        // Poisson(6) has tied modes at 5 and 6
        assert!((pmfs[5] - pmfs[6]).abs() < 1e-15);
    }

    #[test]
    fn pmf_mean_equals_variance() {
        let probs: Vec<f64> = (0..60)
            .map(|n| poisson_count_pmf(0.5, 1.0, 3.0, n).unwrap())
            .collect();
        let total: f64 = probs.iter().sum();
        let mean: f64 = probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let var: f64 = probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - mean).powi(2) * p)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((mean - 1.0).abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_rejects_bad_interval() {
        assert!(matches!(
            poisson_count_pmf(1.0, 2.0, 2.0, 0),
            Err(Error::Interval { .. })
        ));
        assert!(poisson_count_pmf(0.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn hpp_rejects_bad_parameters() {
        let mut rng = RngStream::new(0);
        assert!(simulate_hpp(0.0, 1.0, &mut rng).is_err());
        assert!(simulate_hpp(1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn hpp_tiny_horizon_is_empty() {
        let mut rng = RngStream::new(5);
        let empty = (0..100)
            .filter(|_| simulate_hpp(3.0, 1e-12, &mut rng).unwrap().is_empty())
            .count();
        assert!(empty >= 99);
    }

    #[test]
    fn hpp_count_within_three_sd() {
        let inside = (0..200u64)
            .filter(|&seed| {
                let n = simulate_hpp(2.0, 1000.0, &mut RngStream::new(seed)).unwrap().len() as f64;
                (n - 2000.0).abs() <= 3.0 * 2000f64.sqrt()
            })
            .count();
        assert!(inside >= 198, "{inside}");
    }

    #[test]
    fn nhpp_zero_intensity_is_empty() {
        let f = IntensityFn::constant(0.0, 10.0).unwrap();
        let ev = simulate_nhpp(&f, 10.0, &mut RngStream::new(1)).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn nhpp_horizon_beyond_envelope_rejected() {
        let f = IntensityFn::constant(1.0, 10.0).unwrap();
        assert!(simulate_nhpp(&f, 11.0, &mut RngStream::new(1)).is_err());
    }

    #[test]
    fn nhpp_output_is_valid() {
        let f = IntensityFn::sinusoid(3.0, 2.0, 24.0, 96.0, 24).unwrap();
        let ev = simulate_nhpp(&f, 96.0, &mut RngStream::new(8)).unwrap();
        assert!(EventTimes::new(ev.times().to_vec(), 96.0).is_ok());
        assert!(ev.len() > 200);
    }

    #[test]
    fn mean_examples() {
        let c = IntensityFn::constant(2.0, 5.0).unwrap();
        assert!((nhpp_mean(&c, 0.0, 5.0).unwrap() - 10.0).abs() < 1e-12);

        let lin = IntensityFn::new(
            |t| t,
            vec![EnvelopeSegment {
                start: 0.0,
                end: 2.0,
                bound: 2.0,
            }],
        )
        .unwrap();
        assert!((nhpp_mean(&lin, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-12);

        let s = IntensityFn::sinusoid(3.0, 2.0, 24.0, 96.0, 24).unwrap();
        assert!((nhpp_mean(&s, 0.0, 24.0).unwrap() - 72.0).abs() < 1e-6);
        assert!(matches!(nhpp_mean(&s, 5.0, 5.0), Err(Error::Interval { .. })));
    }

    #[test]
    fn mean_is_additive() {
        let s = IntensityFn::sinusoid(3.0, 2.0, 24.0, 96.0, 24).unwrap();
        let whole = nhpp_mean(&s, 1.3, 70.1).unwrap();
        let parts = nhpp_mean(&s, 1.3, 33.3).unwrap() + nhpp_mean(&s, 33.3, 70.1).unwrap();
        assert!((whole - parts).abs() < 1e-7);
        // analytic antiderivative 3t - (24/pi) cos(2 pi t / 24)
        let anti = |t: f64| 3.0 * t - 2.0 * 24.0 / TAU * (TAU * t / 24.0).cos();
        assert!((whole - (anti(70.1) - anti(1.3))).abs() < 1e-6);
    }

    #[test]
    fn mean_handles_piecewise_jumps() {
        let f = IntensityFn::piecewise(&[0.0, 1.0, 3.0], &[1.0, 4.0]).unwrap();
        assert!((nhpp_mean(&f, 0.5, 2.0).unwrap() - (0.5 + 4.0)).abs() < 1e-12);
    }
}
