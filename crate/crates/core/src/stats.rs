//! Small goodness-of-fit toolkit: chi-square tail, Kolmogorov–Smirnov tests
//! and moment helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ensure, Result};

/// Upper tail `P(X >= x)` of a chi-square variable with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> Result<f64> {
    ensure(df > 0.0, || format!("degrees of freedom must be positive, got {df}"))?;
    let dist = ChiSquared::new(df).map_err(|e| crate::Error::Parameter(e.to_string()))?;
    Ok(dist.sf(x.max(0.0)))
}

/// Pearson statistic `sum (o - e)^2 / e` with its upper-tail p-value.
///
/// `dof_reduction` is subtracted from `bins - 1` for estimated parameters.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], dof_reduction: usize) -> Result<(f64, f64)> {
    ensure(observed.len() == expected.len() && observed.len() >= 2, || {
        "chi-square needs matching observed/expected with at least two bins".into()
    })?;
    ensure(expected.iter().all(|&e| e > 0.0), || {
        "expected frequencies must be positive".into()
    })?;
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let df = (observed.len() - 1).saturating_sub(dof_reduction);
    Ok((stat, chi_square_sf(stat, df as f64)?))
}

/// Kolmogorov survival function `Q(l) = 2 sum (-1)^(k-1) exp(-2 k^2 l^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// Result of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `sample` against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsTest> {
    ensure(!sample.is_empty(), || "KS test needs a non-empty sample".into())?;
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsTest {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    ensure(!a.is_empty() && !b.is_empty(), || {
        "KS test needs two non-empty samples".into()
    })?;
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsTest {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation of paired samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_tail_known_values() {
        // P(chi2_1 >= 3.841459) = 0.05
        assert!((chi_square_sf(3.841_458_820_694_124, 1.0).unwrap() - 0.05).abs() < 1e-9);
        assert!((chi_square_sf(0.0, 3.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_known_points() {
        // Q(1.358) ~= 0.05, Q(1.628) ~= 0.01
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_detects_shifted_sample() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let uniform = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(uniform.p_value > 0.99);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.8).collect();
        assert!(ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).unwrap().p_value < 1e-6);
        assert!(ks_two_sample(&xs, &shifted).unwrap().p_value < 1e-6);
        assert!(ks_two_sample(&xs, &xs).unwrap().p_value > 0.99);
    }

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((sample_variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((correlation(&xs, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
    }
}
