//! Named verification suites binding the simulators to closed forms.
//!
//! A suite is fully determined by its [`SuiteSpec`]: replicate `i` of a suite
//! draws from stream `i` of the spec's seed, and ensembles are collected in
//! replicate order, so reports do not depend on the thread count.

mod analytic;
mod maps;
mod monte_carlo;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::report::{Check, McReport};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "BPHULL_THREADS";

/// Pass thresholds for each statistic type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Width of the band around Laplace and mean targets, in standard errors.
    pub sigmas: f64,
    /// Smallest acceptable Kolmogorov–Smirnov p-value.
    pub ks_level: f64,
    /// Smallest acceptable chi-square p-value.
    pub chi2_level: f64,
    /// Relative tolerance of quadrature identities.
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            sigmas: 3.0,
            ks_level: 1e-3,
            chi2_level: 1e-3,
            rel_tol: 1e-6,
        }
    }
}

/// Discretization overrides; `None` keeps the suite default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteParams {
    pub dt: Option<f64>,
    pub eps_rel: Option<f64>,
    pub x_start: Option<f64>,
    pub n_faces: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub name: String,
    /// Replicates (paths, maps or draws, depending on the suite).
    pub samples: u64,
    pub seed: u64,
    pub tolerance: Tolerance,
    pub params: SuiteParams,
    /// Adds a wall-time check when set.
    pub time_limit_s: Option<f64>,
}

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Suite names with a one-line description.
pub const SUITES: &[(&str, &str)] = &[
    (
        "analytic-identities",
        "ODE residual, flow, inverse, small-mu limit and Levy-measure integrals",
    ),
    (
        "mixture",
        "Gamma mixture of the conditional hull transform against the hull transform",
    ),
    (
        "chapman-kolmogorov",
        "Gamma mixture of the conditional boundary transform",
    ),
    (
        "csbp-laplace",
        "simulated CSBP mass at t = 1 against its Laplace transform",
    ),
    (
        "extinction",
        "simulated extinction times against their distribution function",
    ),
    (
        "boundary-gamma",
        "reversed boundary length at r = 1 against Gamma(3/2)",
    ),
    (
        "xi-sampler",
        "volume marks: Laplace transform and agreement of two samplers",
    ),
    (
        "hull-volume",
        "decorated hull volume at r = 1 against its Laplace transform",
    ),
    (
        "forward-pair",
        "forward mass and volume against the joint transform",
    ),
    (
        "bm-functional",
        "Brownian exit functional against its closed form",
    ),
    (
        "quad-exactness",
        "Schaeffer bijection, map invariants and sampler uniformity",
    ),
    (
        "hull-scaling",
        "hull growth exponent and boundary shape on large random maps",
    ),
];

impl SuiteSpec {
    pub fn new(name: impl Into<String>, samples: u64, seed: u64) -> Self {
        Self {
            name: name.into(),
            samples,
            seed,
            tolerance: Tolerance::default(),
            params: SuiteParams::default(),
            time_limit_s: None,
        }
    }

    /// The suite at its reference size, with its time limit.
    pub fn reference(name: &str, seed: u64) -> AppResult<Self> {
        let (samples, limit) = match name {
            "analytic-identities" | "mixture" | "chapman-kolmogorov" => (100, 5.0),
            "csbp-laplace" | "extinction" => (100_000, 60.0),
            "boundary-gamma" => (100_000, 300.0),
            "xi-sampler" => (1_000_000, 60.0),
            "hull-volume" => (10_000, 600.0),
            "forward-pair" => (100_000, 600.0),
            "bm-functional" => (100_000, 600.0),
            "quad-exactness" => (100, 60.0),
            "hull-scaling" => (50, 600.0),
            _ => return Err(AppError::UnknownSuite(name.to_string())),
        };
        let mut spec = Self::new(name, samples, seed);
        spec.time_limit_s = Some(limit);
        if name == "hull-scaling" {
            spec.tolerance.ks_level = 0.01;
        }
        Ok(spec)
    }

    pub fn validate(&self) -> AppResult<()> {
        if !SUITES.iter().any(|(n, _)| *n == self.name) {
            return Err(AppError::UnknownSuite(self.name.clone()));
        }
        let min = match self.name.as_str() {
            "hull-scaling" => 2,
            _ => 100,
        };
        if self.samples < min {
            return Err(AppError::Config(format!(
                "suite {} needs at least {min} samples, got {}",
                self.name, self.samples
            )));
        }
        let t = &self.tolerance;
        let ok = t.sigmas > 0.0
            && (0.0..1.0).contains(&t.ks_level)
            && (0.0..1.0).contains(&t.chi2_level)
            && t.rel_tol > 0.0;
        if !ok {
            return Err(AppError::Config(format!("invalid tolerance policy {t:?}")));
        }
        let p = &self.params;
        if p.dt.is_some_and(|v| !(v > 0.0)) || p.x_start.is_some_and(|v| !(v > 0.0)) {
            return Err(AppError::Config("dt and x_start must be positive".into()));
        }
        if p.eps_rel.is_some_and(|v| !(v > 0.0 && v < 1.0)) {
            return Err(AppError::Config("eps_rel must lie in (0, 1)".into()));
        }
        if p.n_faces.is_some_and(|v| v < 10) {
            return Err(AppError::Config("n_faces must be at least 10".into()));
        }
        Ok(())
    }
}

/// Result of one suite body: checks plus free-form notes (declared budgets,
/// configuration details).
pub(crate) struct Outcome {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Runs a suite with the worker count from the environment.
pub fn run_suite(spec: &SuiteSpec) -> AppResult<McReport> {
    run_suite_with_threads(spec, threads_from_env())
}

/// Runs a suite on a private pool of `threads` workers (the rayon default when
/// `None`).
pub fn run_suite_with_threads(spec: &SuiteSpec, threads: Option<usize>) -> AppResult<McReport> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| dispatch(spec))?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut checks = outcome.checks;
    if let Some(limit) = spec.time_limit_s {
        checks.push(Check::time("wall time", elapsed, limit));
    }
    Ok(McReport::new(spec.clone(), checks, outcome.notes, elapsed))
}

fn dispatch(spec: &SuiteSpec) -> AppResult<Outcome> {
    match spec.name.as_str() {
        "analytic-identities" => analytic::identities(spec),
        "mixture" => analytic::mixture(spec),
        "chapman-kolmogorov" => analytic::chapman_kolmogorov(spec),
        "csbp-laplace" => monte_carlo::csbp_laplace(spec),
        "extinction" => monte_carlo::extinction(spec),
        "boundary-gamma" => monte_carlo::boundary_gamma(spec),
        "xi-sampler" => monte_carlo::xi_sampler(spec),
        "hull-volume" => monte_carlo::hull_volume(spec),
        "forward-pair" => monte_carlo::forward_pair(spec),
        "bm-functional" => monte_carlo::bm_functional(spec),
        "quad-exactness" => maps::quad_exactness(spec),
        "hull-scaling" => maps::hull_scaling(spec),
        other => Err(AppError::UnknownSuite(other.to_string())),
    }
}

/// Evaluates `f` on replicates `0..n` in parallel, collected in order.
pub fn ensemble<T, F>(n: u64, f: F) -> AppResult<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> bphull_core::Result<T> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<T>, _>>()
        .map_err(AppError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let e = run_suite(&SuiteSpec::new("no-such-suite", 100, 1)).unwrap_err();
        assert!(matches!(e, AppError::UnknownSuite(_)));
        assert_eq!(e.exit_code(), 2);
        assert!(SuiteSpec::reference("no-such-suite", 1).is_err());
    }

    #[test]
    fn every_listed_suite_has_a_reference_size() {
        for (name, _) in SUITES {
            let s = SuiteSpec::reference(name, 1).unwrap();
            s.validate().unwrap();
        }
    }

    #[test]
    fn small_samples_and_bad_tolerances_are_rejected() {
        assert!(SuiteSpec::new("csbp-laplace", 10, 1).validate().is_err());
        let mut s = SuiteSpec::new("csbp-laplace", 1000, 1);
        s.tolerance.ks_level = 1.5;
        assert!(s.validate().is_err());
        let mut s = SuiteSpec::new("csbp-laplace", 1000, 1);
        s.params.eps_rel = Some(0.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn ensemble_is_ordered() {
        let v = ensemble(1000, |i| Ok(i * 2)).unwrap();
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i as u64));
        let e = ensemble(10, |i| {
            if i == 7 {
                Err(bphull_core::Error::Resource("x".into()))
            } else {
                Ok(i)
            }
        });
        assert!(e.is_err());
    }

    #[test]
    fn reports_do_not_depend_on_threads() {
        let spec = SuiteSpec::new("xi-sampler", 20_000, 5);
        let a = run_suite_with_threads(&spec, Some(1)).unwrap();
        let b = run_suite_with_threads(&spec, Some(3)).unwrap();
        assert_eq!(a.replayable(), b.replayable());
    }
}
