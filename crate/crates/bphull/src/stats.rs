//! Test statistics used by the verification suites.

use std::f64::consts::PI;

use bphull_core::path::Moments;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{AppError, AppResult};

/// One point of a Laplace-transform comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePoint {
    pub lambda: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub z: f64,
}

/// Compares the empirical Laplace transform of `samples` with `exact` at
/// every `lambda` in `grid`.
pub fn compare_laplace<F>(samples: &[f64], exact: F, grid: &[f64]) -> AppResult<Vec<LaplacePoint>>
where
    F: Fn(f64) -> bphull_core::Result<f64>,
{
    if samples.len() < 2 {
        return Err(AppError::Core(bphull_core::Error::Degenerate(format!(
            "need at least two samples, got {}",
            samples.len()
        ))));
    }
    if let Some(bad) = samples.iter().find(|s| !(**s >= 0.0)) {
        return Err(AppError::Core(bphull_core::Error::Domain(format!(
            "negative or NaN sample {bad}"
        ))));
    }
    grid.iter()
        .map(|&lambda| {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(AppError::Core(bphull_core::Error::Domain(format!(
                    "grid points must be positive, got {lambda}"
                ))));
            }
            let est = samples
                .iter()
                .map(|&s| (-lambda * s).exp())
                .collect::<Moments>()
                .estimate();
            let target = exact(lambda)?;
            Ok(LaplacePoint {
                lambda,
                estimate: est.mean,
                stderr: est.stderr,
                target,
                z: z_score(est.mean, target, est.stderr),
            })
        })
        .collect()
}

/// `(estimate - target) / stderr`, with a zero standard error giving 0 on an
/// exact match and an infinite score otherwise.
pub fn z_score(estimate: f64, target: f64, stderr: f64) -> f64 {
    let diff = estimate - target;
    if stderr > 0.0 {
        diff / stderr
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Jacobi-transformed series converges fast for small x.
        let t = PI * PI / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 0..20 {
            let m = (2 * k + 1) as f64;
            cdf += (-m * m * t).exp();
        }
        (1.0 - (2.0 * PI).sqrt() / x * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * x * x).exp();
            sf += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Effective sample size used for the p-value.
    pub n_eff: f64,
    pub p_value: f64,
}

/// Asymptotic p-value with Stephens' finite-sample correction.
fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

fn sorted(values: &[f64]) -> AppResult<Vec<f64>> {
    if values.is_empty() {
        return Err(AppError::Core(bphull_core::Error::Degenerate(
            "empty sample".into(),
        )));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(AppError::Core(bphull_core::Error::Domain(
            "NaN in sample".into(),
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample Kolmogorov–Smirnov test against a continuous `cdf`.
pub fn ks_one_sample<F>(values: &[f64], cdf: F) -> AppResult<KsResult>
where
    F: Fn(f64) -> bphull_core::Result<f64>,
{
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        n_eff: n,
        p_value: ks_p_value(d, n),
    })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> AppResult<KsResult> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
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
    let n_eff = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        n_eff,
        p_value: ks_p_value(d, n_eff),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Pearson chi-square test of `counts` against equal cell probabilities.
pub fn chi2_uniform(counts: &[u64]) -> AppResult<Chi2Result> {
    if counts.len() < 2 {
        return Err(AppError::Core(bphull_core::Error::Degenerate(
            "need at least two cells".into(),
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(AppError::Core(bphull_core::Error::Degenerate(
            "no observations".into(),
        )));
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (counts.len() - 1) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| AppError::Config(e.to_string()))?;
    Ok(Chi2Result {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Mean after discarding the `frac` smallest and `frac` largest values.
pub fn trimmed_mean(values: &[f64], frac: f64) -> AppResult<f64> {
    if !(0.0..0.5).contains(&frac) {
        return Err(AppError::Config(format!(
            "trim fraction must lie in [0, 0.5), got {frac}"
        )));
    }
    let v = sorted(values)?;
    let cut = (frac * v.len() as f64).floor() as usize;
    let kept = &v[cut..v.len() - cut];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Two-sided normal tail probability `P(|N| > z)`.
pub fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bphull_core::formulas::boundary_length_laplace;
    use bphull_core::rng::{stream, Lane};
    use rand_distr::{Distribution, Exp1, Gamma};

    #[test]
    fn all_zero_samples_estimate_one() {
        let pts = compare_laplace(&[0.0; 10], |l| boundary_length_laplace(1.0, l), &[1.0]).unwrap();
        assert_eq!(pts[0].estimate, 1.0);
        assert_eq!(pts[0].stderr, 0.0);
        assert_eq!(pts[0].target, boundary_length_laplace(1.0, 1.0).unwrap());
    }

    #[test]
    fn too_few_samples() {
        assert!(compare_laplace(&[1.0], |_| Ok(1.0), &[1.0]).is_err());
        assert!(compare_laplace(&[1.0, -1.0], |_| Ok(1.0), &[1.0]).is_err());
        assert!(compare_laplace(&[1.0, 1.0], |_| Ok(1.0), &[0.0]).is_err());
    }

    #[test]
    fn exponential_samples_match_rational_transform() {
        let mut rng = stream(1, Lane::Test, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| Exp1.sample(&mut rng)).collect();
        for p in compare_laplace(&xs, |l| Ok(1.0 / (1.0 + l)), &[0.5, 1.0, 2.0]).unwrap() {
            assert!(p.z.abs() < 3.0, "{p:?}");
        }
    }

    #[test]
    fn gamma_draws_match_boundary_transform() {
        let mut rng = stream(2, Lane::Test, 0);
        let g = Gamma::new(1.5, 2.0 / 3.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| g.sample(&mut rng)).collect();
        for p in
            compare_laplace(&xs, |l| boundary_length_laplace(1.0, l), &[0.5, 1.0, 2.0]).unwrap()
        {
            assert!(p.z.abs() < 3.0, "{p:?}");
        }
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Tabulated quantiles of the Kolmogorov distribution.
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 2e-4);
        assert!((kolmogorov_sf(1.949) - 0.001).abs() < 3e-5);
        assert!((kolmogorov_sf(0.828) - 0.5).abs() < 2e-3);
        // Both series agree at the switch point.
        let (lo, hi) = (kolmogorov_sf(1.18 - 1e-12), kolmogorov_sf(1.18 + 1e-12));
        assert!((lo - hi).abs() < 1e-10);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_uniform_sample_passes_and_shift_fails() {
        let mut rng = stream(3, Lane::Test, 0);
        let xs: Vec<f64> = (0..20_000)
            .map(|_| bphull_core::samplers::open_unit(&mut rng))
            .collect();
        let r = ks_one_sample(&xs, |x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!(r.p_value > 0.001, "{r:?}");
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.97).collect();
        assert!(
            ks_one_sample(&shifted, |x| Ok(x.clamp(0.0, 1.0)))
                .unwrap()
                .p_value
                < 1e-6
        );
    }

    #[test]
    fn two_sample_statistic_by_hand() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[2.5, 3.5]).unwrap();
        // After 2.0 the first sample is at 2/3 and the second at 0.
        assert!((r.statistic - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.n_eff - 1.2).abs() < 1e-15);
        let same = ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(same.statistic, 0.0);
    }

    #[test]
    fn chi2_against_statrs_quantile() {
        let r = chi2_uniform(&[10, 10, 10, 10]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi2_uniform(&[30, 10]).unwrap();
        assert!((r.statistic - 10.0).abs() < 1e-12);
        assert!((r.p_value - statrs::function::erf::erfc((10.0f64 / 2.0).sqrt())).abs() < 1e-12);
        assert!(chi2_uniform(&[5]).is_err());
    }

    #[test]
    fn trimming() {
        let v = [1.0, 2.0, 3.0, 4.0, 1000.0];
        assert_eq!(trimmed_mean(&v, 0.0).unwrap(), 202.0);
        assert_eq!(trimmed_mean(&v, 0.2).unwrap(), 3.0);
        assert!(trimmed_mean(&v, 0.5).is_err());
    }

    #[test]
    fn normal_tail_at_three() {
        assert!((normal_two_sided(3.0) - 0.002_699_796).abs() < 1e-8);
    }
}
