//! Small statistics toolkit for the fluctuation and drift experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::types::C64;

/// Minimum sample size accepted by [`normality_test`].
pub const MIN_NORMALITY_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: C64,
    /// `sqrt(mean |z - mean|^2)`.
    pub sigma: f64,
}

impl GaussianFit {
    pub fn is_degenerate(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Sample mean and root-mean-square deviation of complex samples.
pub fn gaussian_fit(samples: &[C64]) -> Result<GaussianFit> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: samples.len() });
    }
    let n = samples.len() as f64;
    let mean: C64 = samples.iter().sum::<C64>() / n;
    let var = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n;
    Ok(GaussianFit { mean, sigma: var.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AndersonDarling {
    pub statistic: f64,
    /// Small-sample corrected statistic `A^2 (1 + 0.75/n + 2.25/n^2)`.
    pub adjusted: f64,
    pub p_value: f64,
}

/// Anderson-Darling test of normality with mean and variance estimated
/// from the sample, p-value from the D'Agostino-Stephens interpolation.
pub fn normality_test(samples: &[f64]) -> Result<AndersonDarling> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_NORMALITY_SAMPLES, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) || var.sqrt() <= 1e-14 * mean.abs() {
        return Err(Error::Degenerate);
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let tiny = 1e-300;
    let s: f64 = (0..n)
        .map(|i| {
            let lo = normal.cdf(z[i]).max(tiny);
            let hi = normal.sf(z[n - 1 - i]).max(tiny);
            (2.0 * i as f64 + 1.0) * (lo.ln() + hi.ln())
        })
        .sum();
    let statistic = -nf - s / nf;
    let adjusted = statistic * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let a = adjusted;
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok(AndersonDarling { statistic, adjusted, p_value: p.clamp(0.0, 1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Exponent in `sigma = constant * N^(-alpha)`.
    pub alpha: f64,
    pub constant: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `log sigma = log C - alpha log N`.
pub fn power_law_fit(ns: &[f64], sigmas: &[f64]) -> Result<PowerLawFit> {
    if ns.len() != sigmas.len() {
        return Err(Error::LengthMismatch(ns.len(), sigmas.len()));
    }
    if ns.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: ns.len() });
    }
    if ns.iter().chain(sigmas).any(|v| !(*v > 0.0)) {
        return Err(Error::NonPositiveInput);
    }
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = sigmas.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit { alpha: -fit.slope, constant: fit.intercept.exp(), r_squared: fit.r_squared })
}

/// Bootstrap standard error of the `sigma` of [`gaussian_fit`].
pub fn bootstrap_sigma_se(samples: &[C64], resamples: usize, seed: u64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: samples.len() });
    }
    if resamples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: resamples });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![C64::new(0.0, 0.0); samples.len()];
    let sigmas: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = samples[rng.random_range(0..samples.len())];
            }
            gaussian_fit(&buf).map(|f| f.sigma)
        })
        .collect::<Result<_>>()?;
    let m = sigmas.iter().sum::<f64>() / resamples as f64;
    Ok((sigmas.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt())
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn gaussian_fit_examples() {
        let ones = vec![C64::new(1.0, 0.0); 3];
        let f = gaussian_fit(&ones).unwrap();
        assert_eq!(f.mean, C64::new(1.0, 0.0));
        assert!(f.is_degenerate());
        assert!(matches!(gaussian_fit(&ones[..1]), Err(Error::TooFewSamples { .. })));
        let f = gaussian_fit(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
        assert_eq!(f.sigma, 1.0);
    }

    #[test]
    fn normality_accepts_normal_and_rejects_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(normality_test(&normal).unwrap().p_value > 0.01);
        let uniform: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        assert!(normality_test(&uniform).unwrap().p_value < 0.01);
    }

    #[test]
    fn normality_errors() {
        assert!(matches!(normality_test(&[2.0; 40]), Err(Error::Degenerate)));
        assert!(matches!(normality_test(&[1.0, 2.0]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn exact_power_law() {
        let ns = [100.0, 200.0, 400.0];
        let sig: Vec<f64> = ns.iter().map(|n: &f64| 0.129 * n.powf(-0.5)).collect();
        let fit = power_law_fit(&ns, &sig).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-12);
        assert!((fit.constant - 0.129).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_errors() {
        assert!(matches!(power_law_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]), Err(Error::NonPositiveInput)));
        assert!(matches!(power_law_fit(&[1.0, 2.0], &[1.0, 1.0]), Err(Error::TooFewSamples { .. })));
        assert!(matches!(power_law_fit(&[1.0, 2.0, 3.0], &[1.0, 1.0]), Err(Error::LengthMismatch(3, 2))));
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 1.0);
        assert!((ks_distance(&[0.0, 2.0], &[1.0, 3.0]).unwrap() - 0.5).abs() < 1e-15);
    }
}
