//! Monte Carlo for `E_start[exp(-coeff * int_0^gamma dt / B_t^2)]`, where
//! `gamma` is the hitting time of `stop` by a Brownian motion started at
//! `start > stop > 0`.
//!
//! Euler steps with trapezoidal accumulation of the integrand. Two additions
//! keep the discretization bias small: the step is `dt * (B/stop)^2`, so the
//! relative change of the integrand per step stays uniform, and a
//! Brownian-bridge test catches barrier crossings between grid points. Paths
//! whose weight has fallen below `e^-40` stop early with weight 0.

use libm::{exp, sqrt};
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::path::{McEstimate, Moments};
use crate::rng::{stream, Lane};
use crate::samplers::{open_unit, std_normal};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BmConfig {
    pub dt: f64,
    pub max_steps: u64,
}

impl BmConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            max_steps: 200_000_000,
        }
    }
}

const LOG_WEIGHT_CUTOFF: f64 = 40.0;

fn check(start: f64, stop: f64, coeff: f64, cfg: &BmConfig) -> Result<()> {
    ensure!(
        stop > 0.0 && stop < start && start.is_finite(),
        Domain,
        "need 0 < stop < start, got stop={stop}, start={start}"
    );
    ensure!(
        coeff >= 0.0 && coeff.is_finite(),
        Domain,
        "coeff must be >= 0, got {coeff}"
    );
    ensure!(
        cfg.dt > 0.0 && cfg.dt.is_finite(),
        Config,
        "dt must be positive, got {}",
        cfg.dt
    );
    Ok(())
}

/// One replicate of `exp(-coeff * int dt/B^2)` up to the hitting time of `stop`.
pub fn bm_exit_weight<R: Rng + ?Sized>(
    rng: &mut R,
    start: f64,
    stop: f64,
    coeff: f64,
    cfg: &BmConfig,
) -> Result<f64> {
    check(start, stop, coeff, cfg)?;
    if coeff == 0.0 {
        return Ok(1.0);
    }
    let cutoff = LOG_WEIGHT_CUTOFF / coeff;
    let mut b = start;
    let mut integral = 0.0;
    for _ in 0..cfg.max_steps {
        let rel = b / stop;
        let h = cfg.dt * rel * rel;
        let next = b + sqrt(h) * std_normal(rng);
        let f0 = 1.0 / (b * b);
        if next <= stop {
            let frac = (b - stop) / (b - next);
            integral += 0.5 * frac * h * (f0 + 1.0 / (stop * stop));
            return Ok(exp(-coeff * integral));
        }
        let gap = (b - stop) * (next - stop) / h;
        if gap < 20.0 && open_unit(rng) < exp(-2.0 * gap) {
            // The bridge touched the barrier inside the step; charge half of it.
            integral += 0.25 * h * (f0 + 1.0 / (stop * stop));
            return Ok(exp(-coeff * integral));
        }
        integral += 0.5 * h * (f0 + 1.0 / (next * next));
        if integral > cutoff {
            return Ok(0.0);
        }
        b = next;
    }
    Err(Error::Resource(alloc::format!(
        "no exit within {} steps",
        cfg.max_steps
    )))
}

/// Mean and standard error over `n` replicates seeded from `(seed, i)`.
pub fn bm_exit_functional(
    start: f64,
    stop: f64,
    coeff: f64,
    cfg: &BmConfig,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    check(start, stop, coeff, cfg)?;
    ensure!(n > 0, Config, "need at least one replicate");
    if coeff == 0.0 {
        return Ok(McEstimate {
            mean: 1.0,
            stderr: 0.0,
            n,
        });
    }
    let mut m = Moments::default();
    for i in 0..n {
        m.push(bm_exit_weight(
            &mut stream(seed, Lane::Brownian, i),
            start,
            stop,
            coeff,
            cfg,
        )?);
    }
    Ok(m.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficient_is_exactly_one() {
        let e = bm_exit_functional(2.0, 1.0, 0.0, &BmConfig::new(1e-3), 10, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn domain_checks() {
        assert!(bm_exit_functional(1.0, 2.0, 6.0, &BmConfig::new(1e-3), 10, 1).is_err());
        assert!(bm_exit_functional(2.0, 1.0, 6.0, &BmConfig::new(0.0), 10, 1).is_err());
    }

    #[test]
    fn coarse_estimate_near_target() {
        let e = bm_exit_functional(2.0, 1.0, 6.0, &BmConfig::new(1e-3), 20_000, 5).unwrap();
        assert!((e.mean - 0.125).abs() < 4.0 * e.stderr + 5e-3, "{e:?}");
    }
}
