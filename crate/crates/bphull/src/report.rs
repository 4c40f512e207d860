//! Machine-readable suite reports.

use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::harness::SuiteSpec;
use crate::stats::{normal_two_sided, Chi2Result, KsResult, LaplacePoint};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Estimate within `threshold` standard errors plus `budget` of the target.
    Laplace,
    /// Kolmogorov–Smirnov p-value above `threshold`.
    Ks,
    /// Chi-square p-value above `threshold`.
    Chi2,
    /// Relative error at most `threshold`.
    Quadrature,
    /// Estimate inside `[lower, upper]`.
    Range,
    /// Number of violations, which must be 0.
    Count,
    /// Wall time in seconds at most `threshold`.
    Time,
}

/// One comparison inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub target: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub threshold: f64,
    /// Declared bias budget added to the sampling band.
    pub budget: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
    /// Reported but excluded from the suite verdict.
    pub informational: bool,
}

impl Check {
    fn base(name: impl Into<String>, kind: CheckKind, estimate: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            estimate,
            stderr: None,
            target: None,
            z: None,
            p_value: None,
            threshold,
            budget: 0.0,
            lower: None,
            upper: None,
            pass: false,
            informational: false,
        }
    }

    /// Passes when `|estimate - target| <= sigmas * stderr + budget`.
    pub fn laplace(name: impl Into<String>, p: &LaplacePoint, sigmas: f64, budget: f64) -> Self {
        let half = sigmas * p.stderr + budget;
        Self {
            stderr: Some(p.stderr),
            target: Some(p.target),
            z: Some(p.z),
            budget,
            lower: Some(p.target - half),
            upper: Some(p.target + half),
            pass: (p.estimate - p.target).abs() <= half,
            ..Self::base(name, CheckKind::Laplace, p.estimate, sigmas)
        }
    }

    /// Mean with standard error against a target, with the same band as
    /// [`Check::laplace`].
    pub fn mean(
        name: impl Into<String>,
        estimate: f64,
        stderr: f64,
        target: f64,
        sigmas: f64,
        budget: f64,
    ) -> Self {
        let p = LaplacePoint {
            lambda: f64::NAN,
            estimate,
            stderr,
            target,
            z: crate::stats::z_score(estimate, target, stderr),
        };
        Self::laplace(name, &p, sigmas, budget)
    }

    pub fn ks(name: impl Into<String>, r: &KsResult, level: f64) -> Self {
        Self {
            p_value: Some(r.p_value),
            pass: r.p_value > level,
            ..Self::base(name, CheckKind::Ks, r.statistic, level)
        }
    }

    pub fn chi2(name: impl Into<String>, r: &Chi2Result, level: f64) -> Self {
        Self {
            p_value: Some(r.p_value),
            pass: r.p_value > level,
            ..Self::base(name, CheckKind::Chi2, r.statistic, level)
        }
    }

    pub fn quadrature(name: impl Into<String>, value: f64, target: f64, rel_tol: f64) -> Self {
        let rel = (value - target).abs() / target.abs().max(f64::MIN_POSITIVE);
        Self {
            target: Some(target),
            lower: Some(target - rel_tol * target.abs()),
            upper: Some(target + rel_tol * target.abs()),
            pass: rel <= rel_tol,
            ..Self::base(name, CheckKind::Quadrature, value, rel_tol)
        }
    }

    pub fn range(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
            pass: (lower..=upper).contains(&value),
            ..Self::base(name, CheckKind::Range, value, 0.0)
        }
    }

    pub fn count(name: impl Into<String>, violations: u64) -> Self {
        Self {
            target: Some(0.0),
            pass: violations == 0,
            ..Self::base(name, CheckKind::Count, violations as f64, 0.0)
        }
    }

    pub fn time(name: impl Into<String>, seconds: f64, limit: f64) -> Self {
        Self {
            upper: Some(limit),
            pass: seconds <= limit,
            ..Self::base(name, CheckKind::Time, seconds, limit)
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    /// False-alarm probability of this check under the null.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            CheckKind::Laplace => normal_two_sided(self.threshold),
            CheckKind::Ks | CheckKind::Chi2 => self.threshold,
            _ => 0.0,
        }
    }
}

/// How the per-check levels combine over a suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipleTesting {
    pub statistical_checks: usize,
    /// Bonferroni bound on the probability that some check fails by chance.
    pub family_alpha_bound: f64,
    /// Per-check level that would hold the family at 0.0027 (one 3-sigma test).
    pub bonferroni_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub schema_version: String,
    pub spec: SuiteSpec,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub multiple_testing: MultipleTesting,
    pub wall_time_s: f64,
    pub version: String,
    pub notes: Vec<String>,
}

impl McReport {
    pub fn new(spec: SuiteSpec, checks: Vec<Check>, notes: Vec<String>, wall_time_s: f64) -> Self {
        let pass = checks.iter().all(|c| c.pass || c.informational);
        let alphas: Vec<f64> = checks
            .iter()
            .filter(|c| !c.informational)
            .map(Check::alpha)
            .filter(|&a| a > 0.0)
            .collect();
        let family = alphas.iter().fold(0.0, |acc, a| acc + a).min(1.0);
        let bonferroni_alpha = normal_two_sided(3.0) / alphas.len().max(1) as f64;
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            spec,
            checks,
            pass,
            multiple_testing: MultipleTesting {
                statistical_checks: alphas.len(),
                family_alpha_bound: family,
                bonferroni_alpha,
            },
            wall_time_s,
            version: version_string(),
            notes,
        }
    }

    /// The report with timing and version blanked, for reproducibility checks.
    pub fn replayable(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            version: String::new(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> AppResult<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> AppResult<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(c)
                .map_err(|e| AppError::Config(format!("csv: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| AppError::Config(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| AppError::Config(format!("csv: {e}")))
    }

    /// One line per check plus a verdict line.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = match (c.pass, c.informational) {
                (_, true) => "info",
                (true, false) => "pass",
                (false, false) => "FAIL",
            };
            let detail = match c.kind {
                CheckKind::Laplace => format!(
                    "est {:.6} target {:.6} se {:.2e} z {:+.2} budget {:.1e}",
                    c.estimate,
                    c.target.unwrap_or(f64::NAN),
                    c.stderr.unwrap_or(f64::NAN),
                    c.z.unwrap_or(f64::NAN),
                    c.budget
                ),
                CheckKind::Ks | CheckKind::Chi2 => {
                    format!(
                        "stat {:.5} p {:.4} (level {})",
                        c.estimate,
                        c.p_value.unwrap_or(f64::NAN),
                        c.threshold
                    )
                }
                CheckKind::Quadrature => format!(
                    "value {:.15e} target {:.15e} tol {:.0e}",
                    c.estimate,
                    c.target.unwrap_or(f64::NAN),
                    c.threshold
                ),
                CheckKind::Range => format!(
                    "value {:.3e} in [{:e}, {:e}]",
                    c.estimate,
                    c.lower.unwrap_or(f64::NAN),
                    c.upper.unwrap_or(f64::NAN)
                ),
                CheckKind::Count => format!("{} violations", c.estimate),
                CheckKind::Time => format!("{:.1} s (limit {} s)", c.estimate, c.threshold),
            };
            out.push_str(&format!("  [{verdict}] {}: {detail}\n", c.name));
        }
        out.push_str(&format!(
            "{} {}: {} checks, family alpha <= {:.2e}, {:.1} s\n",
            self.spec.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.multiple_testing.family_alpha_bound,
            self.wall_time_s
        ));
        out
    }
}

/// Package version with the git description captured at build time.
pub fn version_string() -> String {
    format!(
        "bphull {} ({})",
        env!("CARGO_PKG_VERSION"),
        env!("BPHULL_GIT_DESCRIBE")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SuiteSpec {
        SuiteSpec::new("empty", 100, 1)
    }

    #[test]
    fn empty_report_passes() {
        let r = McReport::new(spec(), vec![], vec![], 0.0);
        assert!(r.pass);
        assert_eq!(r.multiple_testing.statistical_checks, 0);
        assert!(r.multiple_testing.family_alpha_bound.is_sign_positive());
        assert_eq!(r.schema_version, "1");
    }

    #[test]
    fn laplace_band_includes_budget() {
        let p = LaplacePoint {
            lambda: 1.0,
            estimate: 0.51,
            stderr: 0.001,
            target: 0.5,
            z: 10.0,
        };
        assert!(!Check::laplace("a", &p, 3.0, 0.0).pass);
        assert!(Check::laplace("a", &p, 3.0, 0.008).pass);
    }

    #[test]
    fn informational_checks_do_not_fail_the_suite() {
        let r = McReport::new(
            spec(),
            vec![Check::range("x", 5.0, 0.0, 1.0).informational()],
            vec![],
            0.0,
        );
        assert!(r.pass);
        let r = McReport::new(spec(), vec![Check::range("x", 5.0, 0.0, 1.0)], vec![], 0.0);
        assert!(!r.pass);
    }

    #[test]
    fn json_round_trip_and_csv_shape() {
        let p = LaplacePoint {
            lambda: 1.0,
            estimate: 0.5,
            stderr: 0.001,
            target: 0.5,
            z: 0.0,
        };
        let checks = vec![
            Check::laplace("lap, one", &p, 3.0, 0.0),
            Check::count("none", 0),
        ];
        let r = McReport::new(spec(), checks, vec![], 1.5);
        let back: McReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("name,kind,estimate,stderr,target,z,p_value,threshold,budget,lower,upper,pass,informational\n"));
        assert!(csv.contains("\"lap, one\""));
        assert!(!csv.contains('\r'));
        assert!((r.multiple_testing.family_alpha_bound - 0.0027).abs() < 1e-4);
    }
}
