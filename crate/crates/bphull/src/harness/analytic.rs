//! Deterministic identity checks: no sampling, only quadrature and finite
//! differences against independent closed forms.

use bphull_core::formulas::{
    conditional_boundary_laplace, hull_volume_laplace, hull_volume_laplace_given_boundary,
    levy_measure_density, psi_of, theta, u_inf, u_joint, w_derivative_at_zero, CsbpParams,
};
use bphull_core::quad::{integrate, integrate_to_infinity, QuadConfig};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

use super::{Outcome, SuiteSpec};
use crate::error::{AppError, AppResult};
use crate::report::Check;

const GRID: [f64; 3] = [0.5, 1.0, 2.0];

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-10,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    }
}

/// Gamma(3/2) law with the given mean.
fn gamma_with_mean(mean: f64) -> AppResult<Gamma> {
    Gamma::new(1.5, 1.5 / mean).map_err(|e| AppError::Config(format!("gamma law: {e}")))
}

/// `E[f(G)]` for `G ~ Gamma(3/2)` with the given mean and `|f| <= 1`.
///
/// The integral stops at `L` with tail mass below 1e-12, which bounds the
/// neglected part.
fn gamma_average<F: Fn(f64) -> bphull_core::Result<f64>>(f: F, mean: f64) -> AppResult<f64> {
    let g = gamma_with_mean(mean)?;
    let mut end = 10.0 * mean;
    while g.sf(end) > 1e-12 {
        end *= 1.5;
    }
    let mut failure = None;
    let mut integrand = |z: f64| match f(z) {
        Ok(v) => v * g.pdf(z),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    // The density has a square-root cusp at 0; split there from the bulk.
    let head = integrate(&mut integrand, 0.0, mean, quad_cfg())?;
    let body = integrate(&mut integrand, mean, end, quad_cfg())?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(head.value + body.value)
}

/// `int_0^inf kappa(y) g(y) dy` with `g(y) = O(y^2)` at 0, through `y = t^2`.
fn kappa_integral<G: Fn(f64) -> f64>(g: G) -> AppResult<f64> {
    let mut integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let y = t * t;
        2.0 * t * levy_measure_density(y).unwrap_or(0.0) * g(y)
    };
    let head = integrate(&mut integrand, 0.0, 1.0, quad_cfg())?;
    let tail = integrate_to_infinity(&mut integrand, 1.0, quad_cfg())?;
    Ok(head.value + tail.value)
}

/// `e^{-z} - 1 + z` without cancellation.
fn exp_remainder(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        z * z * (0.5 - z * (1.0 / 6.0 - z * (1.0 / 24.0 - z / 120.0)))
    } else {
        (-z).exp_m1() + z
    }
}

/// `(1 + a x) e^{-(a + l) x} - 1 + l x`, by its Taylor series near 0.
fn volume_flow_integrand(x: f64, a: f64, l: f64) -> f64 {
    let b = a + l;
    if b * x < 1e-3 {
        // Coefficient of x^k is (-b)^k / k! + a (-b)^{k-1} / (k-1)!; the
        // first two vanish.
        let (mut sum, mut pow_prev, mut fact_prev) = (0.0, -b, 1.0);
        for k in 2..=7 {
            let pow_k = pow_prev * -b;
            let fact_k = fact_prev * k as f64;
            sum += (pow_k / fact_k + a * pow_prev / fact_prev) * x.powi(k);
            pow_prev = pow_k;
            fact_prev = fact_k;
        }
        sum
    } else {
        (1.0 + a * x) * (-b * x).exp() - 1.0 + l * x
    }
}

/// Fourth-order central second derivative.
fn second_derivative<F: Fn(f64) -> bphull_core::Result<f64>>(
    f: &F,
    x: f64,
    h: f64,
) -> bphull_core::Result<f64> {
    let (m2, m1, c, p1, p2) = (
        f(x - 2.0 * h)?,
        f(x - h)?,
        f(x)?,
        f(x + h)?,
        f(x + 2.0 * h)?,
    );
    Ok((-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h))
}

fn max_rel(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs
        .map(|(v, t)| (v - t).abs() / t.abs())
        .fold(0.0, f64::max)
}

pub(super) fn identities(spec: &SuiteSpec) -> AppResult<Outcome> {
    let tol = spec.tolerance.rel_tol;
    let mut checks = Vec::new();
    let xs: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();

    for &lambda in &GRID {
        for &mu in &GRID {
            let u = |x: f64| u_joint(x, lambda, mu);
            let mut worst = 0.0f64;
            for &x in &xs {
                let v = u(x)?;
                let lhs = 0.5 * second_derivative(&u, x, 2e-3)?;
                worst = worst.max((lhs - (2.0 * v * v - mu)).abs() / (2.0 * v * v + mu));
            }
            checks.push(Check::range(
                format!("ode residual lambda={lambda} mu={mu}"),
                worst,
                0.0,
                tol,
            ));
            checks.push(Check::quadrature(
                format!("u(0+) = lambda, lambda={lambda} mu={mu}"),
                u(1e-13)?,
                lambda,
                1e-10,
            ));

            let mut flow = 0.0f64;
            for &(a, b) in &[(0.3, 0.7), (1.0, 1.5), (0.05, 2.0)] {
                let lhs = u_joint(a + b, lambda, mu)?;
                let rhs = u_joint(a, u_joint(b, lambda, mu)?, mu)?;
                flow = flow.max((lhs - rhs).abs() / lhs);
            }
            checks.push(Check::range(
                format!("flow w_(a+b) = w_a w_b lambda={lambda} mu={mu}"),
                flow,
                0.0,
                1e-10,
            ));
        }
    }

    for &mu in &GRID {
        let fixed = (0.5 * mu).sqrt();
        let mut pairs = Vec::new();
        for k in 0..=12 {
            let lambda = fixed * (1.0 + 10f64.powf(-3.0 + 0.5 * k as f64));
            pairs.push((u_inf(theta(mu, lambda)?, mu)?, lambda));
        }
        checks.push(Check::range(
            format!("u_inf(theta) = id mu={mu}"),
            max_rel(pairs.into_iter()),
            0.0,
            1e-12,
        ));
    }

    for &lambda in &GRID {
        // Independent form of the mu = 0 solution.
        let exit = |x: f64| (lambda.powf(-0.5) + (2.0f64 / 3.0).sqrt() * x).powi(-2);
        let exact = max_rel(
            xs.iter()
                .map(|&x| (u_joint(x, lambda, 0.0).unwrap_or(f64::NAN), exit(x))),
        );
        checks.push(Check::range(
            format!("u at mu=0 lambda={lambda}"),
            exact,
            0.0,
            1e-12,
        ));
        let near = max_rel(
            xs.iter()
                .map(|&x| (u_joint(x, lambda, 1e-10).unwrap_or(f64::NAN), exit(x))),
        );
        checks.push(Check::range(
            format!("u at mu=1e-10 lambda={lambda}"),
            near,
            0.0,
            tol,
        ));
    }

    let params = CsbpParams::canonical();
    for &u in &[1.0, 4.0] {
        let psi = kappa_integral(|y| exp_remainder(u * y))?;
        checks.push(Check::quadrature(
            format!("kappa integral = sqrt(8/3) u^1.5, u={u}"),
            psi,
            (8.0f64 / 3.0).sqrt() * u.powf(1.5),
            tol,
        ));
        checks.push(Check::quadrature(
            format!("psi_of matches quadrature, u={u}"),
            psi_of(u, params)?,
            psi,
            tol,
        ));
    }
    for &lambda in &GRID {
        for &mu in &GRID {
            let alpha = (2.0 * mu).sqrt();
            let v = kappa_integral(|x| volume_flow_integrand(x, alpha, lambda))?;
            let closed = -(2.0f64 / 3.0).sqrt() * (alpha + lambda).sqrt() * (alpha - 2.0 * lambda);
            let from_core = -w_derivative_at_zero(lambda, mu)?;
            // The target vanishes at lambda = alpha/2, so errors are measured
            // against a unit scale there.
            let scale = closed.abs().max(1.0);
            let err = (v - closed).abs() / scale;
            checks.push(Check::range(
                format!("volume-flow kappa integral lambda={lambda} mu={mu}"),
                err,
                0.0,
                tol,
            ));
            checks.push(Check::range(
                format!("w_derivative_at_zero matches lambda={lambda} mu={mu}"),
                (from_core - closed).abs() / scale,
                0.0,
                1e-14,
            ));
        }
    }
    Ok(Outcome {
        checks,
        notes: vec!["second derivatives by a fourth-order stencil with h = 2e-3".into()],
    })
}

pub(super) fn mixture(spec: &SuiteSpec) -> AppResult<Outcome> {
    let mut checks = Vec::new();
    for &r in &[0.5, 1.0, 2.0] {
        for &mu in &[0.5, 1.0] {
            let avg = gamma_average(|ell| hull_volume_laplace_given_boundary(r, ell, mu), r * r)?;
            checks.push(Check::quadrature(
                format!("mixture r={r} mu={mu}"),
                avg,
                hull_volume_laplace(r, mu)?,
                spec.tolerance.rel_tol,
            ));
        }
    }
    Ok(Outcome {
        checks,
        notes: vec!["Gamma(3/2) weight with mean r^2, truncated at tail mass 1e-12".into()],
    })
}

pub(super) fn chapman_kolmogorov(spec: &SuiteSpec) -> AppResult<Outcome> {
    let mut checks = Vec::new();
    for &(a, b) in &[(0.5, 1.0), (1.0, 2.0)] {
        for &lambda in &GRID {
            let avg = gamma_average(|z| conditional_boundary_laplace(a, b, z, lambda), b * b)?;
            let target = (1.0 + 2.0 * lambda * a * a / 3.0).powf(-1.5);
            checks.push(Check::quadrature(
                format!("chapman-kolmogorov a={a} b={b} lambda={lambda}"),
                avg,
                target,
                spec.tolerance.rel_tol,
            ));
        }
    }
    Ok(Outcome {
        checks,
        notes: vec!["Gamma(3/2) weight with mean b^2, truncated at tail mass 1e-12".into()],
    })
}
