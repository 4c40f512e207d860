//! Closed-form laws for the stable CSBP, the hull boundary and the hull volume.
//!
//! All functions are pure. Arguments are validated and rejected with
//! [`Error::Domain`]; the documented limit conventions at `lambda = 0` and
//! `mu = 0` return the analytic limit instead of failing.

use core::f64::consts::PI;

use libm::{erf, erfc, exp, expm1, log1p, pow, sqrt};

#[cfg(test)]
use crate::error::Error;
use crate::error::{ensure, Result};

/// √(8/3), the branching coefficient under which the hull boundary is a
/// time-reversed CSBP.
pub const C_CANONICAL: f64 = 1.632_993_161_855_452;

/// Branching mechanism `psi(u) = c * u^{3/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CsbpParams {
    pub c: f64,
}

impl CsbpParams {
    pub fn new(c: f64) -> Result<Self> {
        ensure!(
            c.is_finite() && c > 0.0,
            Domain,
            "branching coefficient must be positive, got {c}"
        );
        Ok(Self { c })
    }

    pub const fn canonical() -> Self {
        Self { c: C_CANONICAL }
    }
}

impl Default for CsbpParams {
    fn default() -> Self {
        Self::canonical()
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    ensure!(
        v >= 0.0 && !v.is_nan(),
        Domain,
        "{name} must be >= 0, got {v}"
    );
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure!(
        v > 0.0 && v.is_finite(),
        Domain,
        "{name} must be > 0 and finite, got {v}"
    );
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<()> {
    ensure!(v.is_finite(), Domain, "{name} must be finite, got {v}");
    Ok(())
}

/// `1 - (1 + z)^{-1/2}` without cancellation for small `z >= 0`.
fn one_minus_rsqrt1p(z: f64) -> f64 {
    if z.is_infinite() {
        return 1.0;
    }
    let r = sqrt(1.0 + z);
    z / (r * (1.0 + r))
}

/// `(q, 1 - q)` with `q = e^{-2s}`.
fn exp_pair(s: f64) -> (f64, f64) {
    (exp(-2.0 * s), -expm1(-2.0 * s))
}

fn coth(s: f64) -> f64 {
    let (q, omq) = exp_pair(s);
    (1.0 + q) / omq
}

fn tanh_pos(s: f64) -> f64 {
    let (q, omq) = exp_pair(s);
    omq / (1.0 + q)
}

/// `u_t(lambda) = (lambda^{-1/2} + c t / 2)^{-2}`, the CSBP Laplace exponent.
pub fn csbp_laplace_exponent(t: f64, lambda: f64, params: CsbpParams) -> Result<f64> {
    nonneg("t", t)?;
    nonneg("lambda", lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let d = 1.0 / sqrt(lambda) + 0.5 * params.c * t;
    Ok(1.0 / (d * d))
}

/// `E_x[exp(-lambda X_t)] = exp(-x u_t(lambda))`.
pub fn csbp_laplace(x: f64, t: f64, lambda: f64, params: CsbpParams) -> Result<f64> {
    nonneg("x", x)?;
    finite("x", x)?;
    Ok(exp(-x * csbp_laplace_exponent(t, lambda, params)?))
}

/// `P_x(T <= t) = exp(-4x / (c^2 t^2))` for the extinction time `T`.
pub fn extinction_cdf(x: f64, t: f64, params: CsbpParams) -> Result<f64> {
    nonneg("x", x)?;
    nonneg("t", t)?;
    if t == 0.0 {
        return Ok(if x == 0.0 { 1.0 } else { 0.0 });
    }
    let c2 = params.c * params.c;
    Ok(exp(-4.0 * x / (c2 * t * t)))
}

/// Density of the extinction time under `P_x`.
pub fn extinction_density(x: f64, t: f64, params: CsbpParams) -> Result<f64> {
    positive("x", x)?;
    positive("t", t)?;
    let c2 = params.c * params.c;
    Ok(8.0 * x / (c2 * t * t * t) * exp(-4.0 * x / (c2 * t * t)))
}

/// Laplace transform of the CSBP transition kernel from time `s` to `t`,
/// conditioned on extinction at time `rho`.
pub fn conditioned_kernel_laplace(
    x: f64,
    s: f64,
    t: f64,
    rho: f64,
    lambda: f64,
    params: CsbpParams,
) -> Result<f64> {
    positive("x", x)?;
    nonneg("s", s)?;
    nonneg("lambda", lambda)?;
    finite("rho", rho)?;
    ensure!(
        s < t && t < rho,
        Domain,
        "need 0 <= s < t < rho, got s={s}, t={t}, rho={rho}"
    );
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let c2 = params.c * params.c;
    let rt = rho - t;
    let ts = t - s;
    let rs = rho - s;
    let pre = rs / (rt + ts * sqrt(1.0 + 0.25 * c2 * lambda * rt * rt));
    // (w + t - s)^{-2} - (rho - s)^{-2} with w = (c^2 lambda/4 + rt^{-2})^{-1/2}
    // written as (rs - b)(rs + b) / (b^2 rs^2), where rs - b = rt - w.
    let rt_minus_w = rt * one_minus_rsqrt1p(0.25 * c2 * lambda * rt * rt);
    let b = rs - rt_minus_w;
    let diff = rt_minus_w * (rs + b) / (b * b * rs * rs);
    Ok(pre * pre * pre * exp(-4.0 * x / c2 * diff))
}

/// `E[exp(-lambda Z_r)] = (1 + 2 lambda r^2 / 3)^{-3/2}`.
pub fn boundary_length_laplace(r: f64, lambda: f64) -> Result<f64> {
    positive("r", r)?;
    nonneg("lambda", lambda)?;
    Ok(pow(1.0 + 2.0 * lambda * r * r / 3.0, -1.5))
}

/// Density of `Z_r`, the Gamma law with shape 3/2 and mean `r^2`.
pub fn boundary_length_density(r: f64, z: f64) -> Result<f64> {
    positive("r", r)?;
    nonneg("z", z)?;
    let scale = 2.0 * r * r / 3.0;
    let y = z / scale;
    Ok(2.0 / sqrt(PI) * sqrt(y) * exp(-y) / scale)
}

/// Distribution function of `Z_r`: `erf(sqrt y) - 2 sqrt(y/pi) e^{-y}`, `y = 3z/(2r^2)`.
pub fn boundary_length_cdf(r: f64, z: f64) -> Result<f64> {
    positive("r", r)?;
    nonneg("z", z)?;
    let y = 1.5 * z / (r * r);
    if y > 1.0 {
        return Ok(1.0 - erfc(sqrt(y)) - 2.0 * sqrt(y / PI) * exp(-y));
    }
    Ok(erf(sqrt(y)) - 2.0 * sqrt(y / PI) * exp(-y))
}

/// `E[exp(-mu |B•_r|)] = 3^{3/2} cosh s (cosh^2 s + 2)^{-3/2}`, `s = (2 mu)^{1/4} r`.
pub fn hull_volume_laplace(r: f64, mu: f64) -> Result<f64> {
    positive("r", r)?;
    nonneg("mu", mu)?;
    finite("mu", mu)?;
    if mu == 0.0 {
        return Ok(1.0);
    }
    let s = pow(2.0 * mu, 0.25) * r;
    let q = exp(-s);
    let sech = 2.0 * q / (1.0 + q * q);
    let sech2 = sech * sech;
    Ok(5.196_152_422_706_632 * sech2 * pow(1.0 + 2.0 * sech2, -1.5))
}

/// Taylor coefficients of `g(s) = 3/2 (s^2 coth^2 s - 1) - s^2` in powers of `s^2`,
/// starting at `s^4`.
const G_SERIES: [f64; 12] = [
    1.0 / 10.0,
    -1.0 / 63.0,
    1.0 / 450.0,
    -1.0 / 3465.0,
    691.0 / 19_348_875.0,
    -2.0 / 467_775.0,
    3617.0 / 7_236_479_250.0,
    -43867.0 / 764_299_911_375.0,
    174_611.0 / 26_865_429_215_625.0,
    -155_366.0 / 213_458_046_676_875.0,
    236_364_091.0 / 2_926_370_608_170_384_375.0,
    -1_315_862.0 / 147_926_426_347_074_375.0,
];

/// `g(s) = 3/2 (s^2 coth^2 s - 1) - s^2`, accurate near zero.
fn hull_exponent_shape(s: f64) -> f64 {
    if s < 0.5 {
        let s2 = s * s;
        let mut acc = 0.0;
        for c in G_SERIES.iter().rev() {
            acc = acc * s2 + c;
        }
        acc * s2 * s2
    } else {
        let sc = s * coth(s);
        1.5 * (sc * sc - 1.0) - s * s
    }
}

/// `E[exp(-mu |B•_r|) | Z_r = ell]`.
///
/// Evaluated as `P(s) exp(-(ell/r^2) g(s))` with `P(s) = s^3 cosh s / sinh^3 s`;
/// the `3/(2r^2)` term cancels analytically against the `coth^2` blow-up.
pub fn hull_volume_laplace_given_boundary(r: f64, ell: f64, mu: f64) -> Result<f64> {
    positive("r", r)?;
    nonneg("ell", ell)?;
    finite("ell", ell)?;
    nonneg("mu", mu)?;
    finite("mu", mu)?;
    if mu == 0.0 {
        return Ok(1.0);
    }
    let s = pow(2.0 * mu, 0.25) * r;
    let (q, omq) = exp_pair(s);
    if q == 0.0 {
        return Ok(0.0);
    }
    let prefactor = 4.0 * s * s * s * q * (1.0 + q) / (omq * omq * omq);
    Ok(prefactor * exp(-ell / (r * r) * hull_exponent_shape(s)))
}

/// `N_x(W_* <= y) = 3 / (2 (x - y)^2)`.
pub fn snake_min_tail(x: f64, y: f64) -> Result<f64> {
    finite("x", x)?;
    finite("y", y)?;
    ensure!(y < x, Domain, "need y < x, got x={x}, y={y}");
    let d = x - y;
    Ok(1.5 / (d * d))
}

/// `N_x(1 - exp(-mu Z_a)) = (mu^{-1/2} + sqrt(2/3)(x - a))^{-2}`.
///
/// `mu = +inf` is accepted and gives the exit-measure mass `3/(2(x-a)^2)`.
pub fn exit_laplace(x: f64, a: f64, mu: f64) -> Result<f64> {
    finite("x", x)?;
    finite("a", a)?;
    nonneg("mu", mu)?;
    ensure!(a < x, Domain, "need a < x, got x={x}, a={a}");
    let d = 1.0 / sqrt(mu) + sqrt(2.0 / 3.0) * (x - a);
    Ok(1.0 / (d * d))
}

/// `3/2 ((x - a + (2 lambda/3 + a^{-2})^{-1/2})^{-2} - x^{-2})`.
pub fn truncated_exit_laplace(x: f64, a: f64, lambda: f64) -> Result<f64> {
    positive("a", a)?;
    finite("x", x)?;
    nonneg("lambda", lambda)?;
    ensure!(x > a, Domain, "need x > a > 0, got x={x}, a={a}");
    // With w = (2 lambda/3 + a^{-2})^{-1/2} and b = x - a + w we have x - b = a - w.
    let a_minus_w = a * one_minus_rsqrt1p(2.0 * lambda * a * a / 3.0);
    let b = x - a_minus_w;
    Ok(1.5 * a_minus_w * (x + b) / (b * b * x * x))
}

/// `u_inf(x) = sqrt(mu/2) (3 coth^2((2 mu)^{1/4} x) - 2)`.
pub fn u_inf(x: f64, mu: f64) -> Result<f64> {
    positive("x", x)?;
    positive("mu", mu)?;
    let ct = coth(pow(2.0 * mu, 0.25) * x);
    Ok(sqrt(0.5 * mu) * (3.0 * ct * ct - 2.0))
}

/// `arcoth(sqrt(2/3 + sqrt(2/mu) lambda / 3))` for `lambda > sqrt(mu/2)`.
fn theta_scaled(mu: f64, lambda: f64) -> f64 {
    let k = sqrt(2.0 / mu) * lambda;
    let y = sqrt((2.0 + k) / 3.0);
    let y_minus_1 = (k - 1.0) / 3.0 / (y + 1.0);
    0.5 * log1p(2.0 / y_minus_1)
}

/// Functional inverse of `u_inf(., mu)`.
pub fn theta(mu: f64, lambda: f64) -> Result<f64> {
    positive("mu", mu)?;
    finite("lambda", lambda)?;
    ensure!(
        lambda > sqrt(0.5 * mu),
        Domain,
        "theta needs lambda > sqrt(mu/2), got lambda={lambda}, mu={mu}"
    );
    Ok(theta_scaled(mu, lambda) / pow(2.0 * mu, 0.25))
}

/// `u_{lambda,mu}(x)`: solution of `u''/2 = 2u^2 - mu` with `u(0) = lambda`
/// that stays bounded as `x -> inf`.
///
/// `mu = 0` returns the limit `(lambda^{-1/2} + sqrt(2/3) x)^{-2}`.
pub fn u_joint(x: f64, lambda: f64, mu: f64) -> Result<f64> {
    positive("x", x)?;
    nonneg("lambda", lambda)?;
    finite("lambda", lambda)?;
    nonneg("mu", mu)?;
    finite("mu", mu)?;
    if mu == 0.0 {
        return exit_laplace(x, 0.0, lambda);
    }
    let fixed = sqrt(0.5 * mu);
    if (lambda - fixed).abs() <= 1e-14 * fixed {
        return Ok(fixed);
    }
    let scale = pow(2.0 * mu, 0.25);
    let k = sqrt(2.0 / mu) * lambda;
    if lambda > fixed {
        let ct = coth(scale * x + theta_scaled(mu, lambda));
        Ok(fixed * (3.0 * ct * ct - 2.0))
    } else {
        let y = sqrt((2.0 + k) / 3.0);
        let one_minus_y = (1.0 - k) / 3.0 / (1.0 + y);
        let shift = 0.5 * log1p(2.0 * y / one_minus_y);
        let th = tanh_pos(scale * x + shift);
        Ok(fixed * (3.0 * th * th - 2.0))
    }
}

/// Laplace transform of `Z_a` given `Z_b = z_b`, for `0 < a < b`.
pub fn conditional_boundary_laplace(a: f64, b: f64, z_b: f64, lambda: f64) -> Result<f64> {
    positive("a", a)?;
    finite("b", b)?;
    nonneg("z_b", z_b)?;
    finite("z_b", z_b)?;
    nonneg("lambda", lambda)?;
    ensure!(a < b, Domain, "need 0 < a < b, got a={a}, b={b}");
    let z = 2.0 * lambda * a * a / 3.0;
    let pre = b / (a + (b - a) * sqrt(1.0 + z));
    let a_minus_w = a * one_minus_rsqrt1p(z);
    let big = b - a_minus_w;
    let diff = a_minus_w * (b + big) / (big * big * b * b);
    Ok(pre * pre * pre * exp(-1.5 * z_b * diff))
}

/// Laplace transform of the volume marks: `(1 + sqrt(2 beta)) e^{-sqrt(2 beta)}`.
pub fn xi_laplace(beta: f64) -> Result<f64> {
    nonneg("beta", beta)?;
    let s = sqrt(2.0 * beta);
    Ok((1.0 + s) * exp(-s))
}

/// Density of the volume marks, `(2 pi x^5)^{-1/2} e^{-1/(2x)}`.
pub fn xi_density(x: f64) -> Result<f64> {
    nonneg("x", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(exp(-0.5 / x) / sqrt(2.0 * PI * x * x * x * x * x))
}

/// Distribution function of the volume marks.
pub fn xi_cdf(x: f64) -> Result<f64> {
    nonneg("x", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let v = 0.5 / x;
    Ok(erfc(sqrt(v)) + sqrt(2.0 / (PI * x)) * exp(-v))
}

/// Lévy measure density `sqrt(3/(2 pi)) y^{-5/2}` of the canonical mechanism.
pub fn levy_measure_density(y: f64) -> Result<f64> {
    positive("y", y)?;
    Ok(sqrt(1.5 / PI) / (y * y * sqrt(y)))
}

/// `psi(u) = c u^{3/2}`.
pub fn psi_of(u: f64, params: CsbpParams) -> Result<f64> {
    nonneg("u", u)?;
    Ok(params.c * u * sqrt(u))
}

/// Derivative at zero of the volume-flow semigroup:
/// `sqrt(2/3) sqrt(alpha + lambda) (alpha - 2 lambda)`, `alpha = sqrt(2 mu)`.
pub fn w_derivative_at_zero(lambda: f64, mu: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    let alpha = sqrt(2.0 * mu);
    Ok(sqrt(2.0 / 3.0) * sqrt(alpha + lambda) * (alpha - 2.0 * lambda))
}
