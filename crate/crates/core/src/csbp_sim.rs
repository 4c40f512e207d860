//! Seeded simulation of the CSBP with mechanism `psi(u) = c u^{3/2}` and of
//! its time reversal from a high level.
//!
//! The process is the Lamperti time change of a spectrally positive 3/2-stable
//! Lévy process `Y`: real time is `int dθ / Y_θ` in the driver's clock `θ`.
//! Each step runs the driver for clock `x h` from mass `x` and converts back to
//! real time by quadrature, so grid times are random. The step that would
//! reach the caller's time limit instead freezes the mass and runs for exactly
//! the remaining real time. Below the absorption floor the remaining
//! extinction time is drawn from its exact law.
//!
//! Two drivers are available:
//!
//! * [`Driver::Stable`] draws exact stable increments, with the trapezoidal
//!   rule for real time, and classifies a move as a jump when it exceeds both
//!   the jump threshold and 8 times the increment scale. Laws at fixed times
//!   are accurate; values read off inside a step of a stored path carry a bias
//!   of the order of the step, because long steps are the ones that drop.
//! * [`Driver::Resolved`] splits the Lévy measure at the threshold: jumps above
//!   it are drawn individually (compound Poisson with Pareto sizes) at uniform
//!   clock positions, the rest is replaced by its compensator plus a Gaussian
//!   of matching variance and interpolated linearly in clock. Every jump gets
//!   its own grid point, with real time integrated exactly along the linear
//!   pieces, so stored paths can be read at any time. Every recorded jump is a
//!   genuine jump of the driver, which is what the volume decoration needs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cbrt, sqrt};
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::formulas::{CsbpParams, C_CANONICAL};
use crate::path::{JumpRecord, PathMeta, SampledPath};
use crate::rng::{stream, Lane};
use crate::samplers::{exp1, open_unit, poisson, stable_three_halves, std_normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Driver {
    Stable,
    Resolved,
}

/// Discretization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Largest step.
    pub dt: f64,
    /// Absolute jump threshold.
    pub eps: f64,
    /// Threshold as a fraction of the current mass; the effective threshold is
    /// `max(eps, eps_rel * x)`.
    pub eps_rel: f64,
    /// Nominal steps are `min(dt, step_scale * sqrt(x))`, which keeps the
    /// relative move per step roughly constant as the mass shrinks.
    pub step_scale: f64,
    /// Below `absorb_rel * x0` the path waits for an exactly sampled
    /// extinction time and then drops to 0.
    pub absorb_rel: f64,
    pub max_steps: u64,
    pub driver: Driver,
}

impl SimConfig {
    /// Exact stable increments; adequate for laws of the mass alone.
    pub fn stable(dt: f64, eps: f64) -> Self {
        Self {
            dt,
            eps,
            eps_rel: 0.0,
            step_scale: 2e-2,
            absorb_rel: 1e-6,
            max_steps: 50_000_000,
            driver: Driver::Stable,
        }
    }

    /// Individually resolved jumps above `max(eps, eps_rel x)`.
    pub fn resolved(dt: f64, eps: f64, eps_rel: f64) -> Self {
        // Relative compensator drift per step is 2 A step_scale / sqrt(eps_rel)
        // with A = sqrt(3/(2 pi)); hold it near 14%.
        let step_scale = if eps_rel > 0.0 {
            0.1 * sqrt(eps_rel)
        } else {
            2e-2
        };
        Self {
            dt,
            eps,
            eps_rel,
            step_scale,
            absorb_rel: 1e-6,
            max_steps: 50_000_000,
            driver: Driver::Resolved,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.dt > 0.0 && self.dt.is_finite(),
            Config,
            "dt must be positive, got {}",
            self.dt
        );
        ensure!(
            self.eps > 0.0 && self.eps.is_finite(),
            Config,
            "eps must be positive, got {}",
            self.eps
        );
        ensure!(
            self.eps_rel >= 0.0 && self.eps_rel < 1.0,
            Config,
            "eps_rel must lie in [0, 1), got {}",
            self.eps_rel
        );
        ensure!(self.step_scale > 0.0, Config, "step_scale must be positive");
        ensure!(
            self.absorb_rel > 0.0 && self.absorb_rel < 1.0,
            Config,
            "absorb_rel must lie in (0, 1)"
        );
        ensure!(self.max_steps > 0, Config, "max_steps must be positive");
        Ok(())
    }
}

/// One completed step of [`CsbpStepper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub t_start: f64,
    pub h: f64,
    pub x_start: f64,
    pub x_end: f64,
    /// Mass just before `t_start + h`; differs from `x_end` across a jump.
    pub x_left: f64,
    /// Expected sum of squared jumps below the resolution threshold.
    pub unresolved_sq: f64,
}

/// Incremental simulator; [`simulate_csbp`] and the ensemble drivers are
/// built on it.
#[derive(Debug, Clone)]
pub struct CsbpStepper {
    cfg: SimConfig,
    /// `sqrt(3/(2 pi)) * c / sqrt(8/3)`: density constant of the Lévy measure.
    levy_const: f64,
    c: f64,
    floor: f64,
    t: f64,
    x: f64,
    /// Extinction time drawn once the mass is below the floor.
    death: Option<f64>,
    /// Segments of the current step still to be emitted, last one first.
    pending: Vec<Segment>,
    steps: u64,
}

/// Piece of a step ending at `t_end` with mass `x_end`, possibly right after a
/// jump of size `jump`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    t_end: f64,
    x_end: f64,
    x_left: f64,
    jump: Option<f64>,
    unresolved_sq: f64,
}

impl CsbpStepper {
    pub fn new(x0: f64, params: CsbpParams, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        ensure!(
            x0 >= 0.0 && x0.is_finite(),
            Domain,
            "x0 must be finite and >= 0, got {x0}"
        );
        ensure!(
            params.c > 0.0 && params.c.is_finite(),
            Domain,
            "c must be positive"
        );
        Ok(Self {
            cfg,
            levy_const: sqrt(1.5 / PI) * params.c / C_CANONICAL,
            c: params.c,
            floor: cfg.absorb_rel * x0,
            t: 0.0,
            x: x0,
            death: None,
            pending: Vec::new(),
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mass(&self) -> f64 {
        self.x
    }

    pub fn is_extinct(&self) -> bool {
        self.x == 0.0
    }

    fn threshold(&self) -> f64 {
        self.cfg.eps.max(self.cfg.eps_rel * self.x)
    }

    /// Advances one grid segment without passing `limit`. Resolved jumps are
    /// appended to `jumps`. Returns `None` once the mass is 0 or `limit` has
    /// been reached.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        limit: f64,
        jumps: &mut Vec<JumpRecord>,
    ) -> Result<Option<StepReport>> {
        if let Some(seg) = self.pending.pop() {
            return Ok(Some(self.apply(seg, jumps)));
        }
        if self.x == 0.0 || self.t >= limit {
            return Ok(None);
        }
        if self.steps >= self.cfg.max_steps {
            return Err(Error::Resource(alloc::format!(
                "step budget of {} exhausted at t={} with mass {}",
                self.cfg.max_steps,
                self.t,
                self.x
            )));
        }
        self.steps += 1;
        let x = self.x;
        if x <= self.floor {
            return Ok(Some(self.wait_for_death(rng, limit)));
        }
        let nominal = self.cfg.dt.min(self.cfg.step_scale * sqrt(x));
        let last = self.t + 2.0 * nominal >= limit;
        let h = if last { limit - self.t } else { nominal };
        let eps = self.threshold();
        match self.cfg.driver {
            Driver::Stable => self.stable_step(rng, x, h, last, limit, eps, jumps),
            Driver::Resolved => self.resolved_step(rng, x, h, last, limit, eps),
        }
        let seg = self.pending.pop().expect("a step has at least one segment");
        Ok(Some(self.apply(seg, jumps)))
    }

    fn apply(&mut self, seg: Segment, jumps: &mut Vec<JumpRecord>) -> StepReport {
        let report = StepReport {
            t_start: self.t,
            h: seg.t_end - self.t,
            x_start: self.x,
            x_end: seg.x_end,
            x_left: seg.x_left,
            unresolved_sq: seg.unresolved_sq,
        };
        self.t = seg.t_end;
        self.x = seg.x_end;
        if let Some(size) = seg.jump {
            jumps.push(JumpRecord {
                time: seg.t_end,
                size,
            });
        }
        report
    }

    #[allow(clippy::too_many_arguments)]
    fn stable_step<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        x: f64,
        h: f64,
        last: bool,
        limit: f64,
        eps: f64,
        jumps: &mut Vec<JumpRecord>,
    ) {
        let clock = x * h;
        let scale = cbrt(self.c * clock / core::f64::consts::SQRT_2);
        let scale = scale * scale;
        let inc = scale * stable_three_halves(rng);
        let cut = eps.max(8.0 * scale);
        let y = x + inc;
        let t_end = if last {
            limit
        } else if y > 0.0 {
            (self.t + 0.5 * clock * (1.0 / x + 1.0 / y)).min(limit)
        } else {
            self.t + h
        };
        let x_end = if y > 0.0 { y } else { 0.0 };
        // Nothing survives an absorbing step.
        if inc > cut && x_end > 0.0 {
            jumps.push(JumpRecord {
                time: self.t + open_unit(rng) * (t_end - self.t),
                size: inc,
            });
        }
        let unresolved_sq = 2.0 * self.levy_const * sqrt(cut) * clock;
        self.pending.push(Segment {
            t_end,
            x_end,
            x_left: x_end,
            jump: None,
            unresolved_sq,
        });
    }

    #[allow(clippy::too_many_arguments)]
    fn resolved_step<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        x: f64,
        h: f64,
        last: bool,
        limit: f64,
        eps: f64,
    ) {
        let a = self.levy_const;
        let clock = x * h;
        let rate = 2.0 / 3.0 * a / (eps * sqrt(eps));
        let small_var = 2.0 * a * sqrt(eps) * clock;
        let cont = -2.0 * a / sqrt(eps) * clock + sqrt(small_var) * std_normal(rng);
        let count = poisson(rng, clock * rate);
        let mut big: Vec<(f64, f64)> = (0..count)
            .map(|_| {
                let u = open_unit(rng);
                (open_unit(rng), eps / cbrt(u * u))
            })
            .collect();
        big.sort_by(|p, q| p.0.total_cmp(&q.0));

        // Mass just before each jump and at the end, along the linear pieces.
        let mut before = Vec::with_capacity(big.len() + 1);
        let mut acc = 0.0;
        for &(u, y) in &big {
            before.push(x + cont * u + acc);
            acc += y;
        }
        let end = x + cont + acc;
        before.push(end);
        let t0 = self.t;
        if before.iter().any(|&v| v <= 0.0) {
            // Absorbed inside the step: no jump survives.
            let t_end = if last { limit } else { (t0 + h).min(limit) };
            self.pending.push(Segment {
                t_end,
                x_end: 0.0,
                x_left: 0.0,
                jump: None,
                unresolved_sq: small_var,
            });
            return;
        }

        let mut times = Vec::with_capacity(before.len());
        let (mut u_prev, mut start, mut elapsed) = (0.0, x, 0.0);
        for (k, &stop) in before.iter().enumerate() {
            let u = big.get(k).map_or(1.0, |p| p.0);
            elapsed += if last {
                (u - u_prev) * h
            } else {
                (u - u_prev) * clock * inv_log_mean(start, stop)
            };
            times.push(elapsed);
            if let Some(p) = big.get(k) {
                start = stop + p.1;
            }
            u_prev = u;
        }
        let total = elapsed;
        let squeeze = if last || t0 + total > limit {
            (limit - t0) / total
        } else {
            1.0
        };
        let n = before.len();
        for k in (0..n).rev() {
            let t_end = if k == n - 1 && (last || squeeze != 1.0) {
                limit
            } else {
                t0 + times[k] * squeeze
            };
            let (x_end, jump) = match big.get(k) {
                Some(&(_, y)) => (before[k] + y, Some(y)),
                None => (end, None),
            };
            let u_lo = if k == 0 { 0.0 } else { big[k - 1].0 };
            let u_hi = big.get(k).map_or(1.0, |p| p.0);
            self.pending.push(Segment {
                t_end,
                x_end,
                x_left: before[k],
                jump,
                unresolved_sq: small_var * (u_hi - u_lo),
            });
        }
    }

    /// Below the floor: hold the mass until the exactly sampled extinction
    /// time `2 sqrt(x) / (c sqrt(E))`, `E` standard exponential.
    fn wait_for_death<R: Rng + ?Sized>(&mut self, rng: &mut R, limit: f64) -> StepReport {
        let (t, x, c) = (self.t, self.x, self.c);
        let death = *self
            .death
            .get_or_insert_with(|| t + 2.0 * sqrt(x) / (c * sqrt(exp1(rng))));
        let end = death.min(limit);
        let x_end = if death <= limit { 0.0 } else { x };
        self.t = end;
        self.x = x_end;
        // The path is taken to decline linearly to 0 over the wait.
        StepReport {
            t_start: t,
            h: end - t,
            x_start: x,
            x_end,
            x_left: x_end,
            unresolved_sq: 0.0,
        }
    }
}

/// `int_0^1 du / (a + (b - a) u)`, the reciprocal logarithmic mean of `a, b > 0`.
fn inv_log_mean(a: f64, b: f64) -> f64 {
    let d = b - a;
    if d.abs() <= 1e-6 * a {
        // Series in d/a keeps the ratio accurate as b approaches a.
        let e = d / a;
        (1.0 - e / 2.0 + e * e / 3.0) / a
    } else {
        libm::log(b / a) / d
    }
}

fn meta(cfg: &SimConfig, seed: u64, replicate: u64) -> PathMeta {
    PathMeta {
        seed,
        replicate,
        dt: cfg.dt,
        jump_threshold: cfg.eps,
        jump_threshold_rel: cfg.eps_rel,
    }
}

/// Forward path from `x0` up to `min(horizon, extinction)`, driven by `rng`.
/// `horizon = +inf` runs to extinction.
pub fn simulate_csbp_with<R: Rng + ?Sized>(
    rng: &mut R,
    x0: f64,
    params: CsbpParams,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<SampledPath> {
    ensure!(
        horizon > 0.0,
        Domain,
        "horizon must be positive, got {horizon}"
    );
    let mut stepper = CsbpStepper::new(x0, params, *cfg)?;
    let mut times = alloc::vec![0.0];
    let mut values = alloc::vec![x0];
    let mut left_limits = alloc::vec![x0];
    let mut unresolved_sq = alloc::vec![0.0];
    let mut jumps = Vec::new();
    let mut acc = 0.0;
    while let Some(s) = stepper.step(rng, horizon, &mut jumps)? {
        acc += s.unresolved_sq;
        times.push(stepper.time());
        values.push(s.x_end);
        left_limits.push(s.x_left);
        unresolved_sq.push(acc);
    }
    if x0 == 0.0 && horizon.is_finite() {
        times.push(horizon);
        values.push(0.0);
        left_limits.push(0.0);
        unresolved_sq.push(0.0);
    }
    Ok(SampledPath {
        times,
        values,
        left_limits,
        jumps,
        unresolved_sq,
        meta: meta(cfg, 0, 0),
    })
}

/// Forward CSBP path; a deterministic function of the arguments and `seed`.
pub fn simulate_csbp(
    x0: f64,
    params: CsbpParams,
    horizon: f64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<SampledPath> {
    let mut rng = stream(seed, Lane::Csbp, 0);
    let mut p = simulate_csbp_with(&mut rng, x0, params, horizon, cfg)?;
    p.meta.seed = seed;
    Ok(p)
}

/// Reverses a forward path that ended in extinction and keeps `r <= r_max`.
///
/// With extinction at `T`, the reversed path is `Z_r = X_{(T - r)-}`; values
/// and left limits of the forward grid swap roles, so the interpolation between
/// grid points carries over. Jumps of `X` at `s` become downward jumps of `Z`
/// at `T - s`. If `T < r_max` the path is held at its starting mass beyond `T`.
pub fn reverse_to_boundary(forward: &SampledPath, r_max: f64) -> Result<SampledPath> {
    ensure!(
        r_max > 0.0 && r_max.is_finite(),
        Domain,
        "r_max must be positive, got {r_max}"
    );
    let n = forward.len();
    ensure!(
        n >= 2 && forward.last_value() == 0.0,
        Domain,
        "reversal needs a path that reached extinction"
    );
    let t_ext = forward.times[n - 1];
    let total_sq = forward.unresolved_sq[n - 1];
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut left_limits = Vec::new();
    let mut unresolved_sq = Vec::new();
    // Reversed grid point j sits at r = T - t_m with m = n-1-j; values and left
    // limits swap roles.
    for j in 0..n {
        let m = n - 1 - j;
        let r = t_ext - forward.times[m];
        if r > r_max {
            break;
        }
        times.push(r);
        values.push(forward.left_limits[m]);
        left_limits.push(if j == 0 {
            forward.left_limits[m]
        } else {
            forward.values[m]
        });
        unresolved_sq.push(total_sq - forward.unresolved_sq[m]);
    }
    let j = times.len() - 1;
    let last_r = times[j];
    if last_r < r_max {
        let m = n - 1 - j;
        let (z, sq) = if m == 0 {
            (forward.values[0], unresolved_sq[j])
        } else {
            let next_r = t_ext - forward.times[m - 1];
            let frac = (r_max - last_r) / (next_r - last_r);
            let (a, b) = (values[j], forward.values[m - 1]);
            let z = if a > 0.0 && b > 0.0 {
                a * libm::pow(b / a, frac)
            } else {
                a + (b - a) * frac
            };
            let seg_sq = forward.unresolved_sq[m] - forward.unresolved_sq[m - 1];
            (z, unresolved_sq[j] + frac * seg_sq)
        };
        times.push(r_max);
        values.push(z);
        left_limits.push(z);
        unresolved_sq.push(sq);
    }
    let mut jumps: Vec<JumpRecord> = forward
        .jumps
        .iter()
        .map(|j| JumpRecord {
            time: t_ext - j.time,
            size: j.size,
        })
        .filter(|j| j.time <= r_max)
        .collect();
    jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(SampledPath {
        times,
        values,
        left_limits,
        jumps,
        unresolved_sq,
        meta: forward.meta,
    })
}

/// Boundary-length process on `(0, r_max]`, from the canonical CSBP started at
/// `x_start` and run to extinction, with the randomness drawn from `rng`.
pub fn simulate_reversed_boundary_with<R: Rng + ?Sized>(
    rng: &mut R,
    r_max: f64,
    x_start: f64,
    cfg: &SimConfig,
) -> Result<SampledPath> {
    ensure!(
        x_start > 0.0 && x_start.is_finite(),
        Domain,
        "x_start must be positive, got {x_start}"
    );
    let forward = simulate_csbp_with(rng, x_start, CsbpParams::canonical(), f64::INFINITY, cfg)?;
    reverse_to_boundary(&forward, r_max)
}

pub fn simulate_reversed_boundary(
    r_max: f64,
    x_start: f64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<SampledPath> {
    let mut rng = stream(seed, Lane::Csbp, 0);
    let mut p = simulate_reversed_boundary_with(&mut rng, r_max, x_start, cfg)?;
    p.meta.seed = seed;
    Ok(p)
}

/// Default start level standing in for `+inf` when the boundary is observed up to `r_max`.
pub fn default_start_level(r_max: f64) -> f64 {
    50.0 * r_max * r_max
}

/// Mass at `t_obs` and extinction time of one forward path, without storing it.
pub fn mass_and_extinction<R: Rng + ?Sized>(
    rng: &mut R,
    x0: f64,
    params: CsbpParams,
    t_obs: f64,
    cfg: &SimConfig,
) -> Result<(f64, f64)> {
    let mut stepper = CsbpStepper::new(x0, params, *cfg)?;
    let mut scratch = Vec::new();
    while stepper.step(rng, t_obs, &mut scratch)?.is_some() {
        scratch.clear();
    }
    let at_obs = stepper.mass();
    while stepper.step(rng, f64::INFINITY, &mut scratch)?.is_some() {
        scratch.clear();
    }
    Ok((at_obs, stepper.time()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{boundary_length_laplace, csbp_laplace};
    use crate::path::Moments;

    #[test]
    fn zero_start_is_zero_path() {
        let cfg = SimConfig::stable(1e-3, 1e-3);
        let p = simulate_csbp(0.0, CsbpParams::canonical(), 2.0, &cfg, 1).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        assert!(p.jumps.is_empty());
        p.validate().unwrap();
    }

    #[test]
    fn bad_config_is_rejected() {
        let mut cfg = SimConfig::stable(0.0, 1e-3);
        assert!(matches!(
            simulate_csbp(1.0, CsbpParams::canonical(), 1.0, &cfg, 1),
            Err(Error::Config(_))
        ));
        cfg.dt = 1e-3;
        cfg.eps = -1.0;
        assert!(matches!(
            simulate_csbp(1.0, CsbpParams::canonical(), 1.0, &cfg, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SimConfig::resolved(1e-3, 1e-6, 1e-2);
        let a = simulate_csbp(1.0, CsbpParams::canonical(), 1.0, &cfg, 5).unwrap();
        let b = simulate_csbp(1.0, CsbpParams::canonical(), 1.0, &cfg, 5).unwrap();
        assert_eq!(a, b);
        let c = simulate_csbp(1.0, CsbpParams::canonical(), 1.0, &cfg, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn paths_are_well_formed() {
        for cfg in [
            SimConfig::stable(1e-3, 1e-3),
            SimConfig::resolved(1e-3, 1e-6, 1e-2),
        ] {
            for seed in 0..20 {
                let p = simulate_csbp(1.0, CsbpParams::canonical(), 2.0, &cfg, seed).unwrap();
                p.validate().unwrap();
                assert!(p.times.last().copied().unwrap() <= 2.0);
            }
        }
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut cfg = SimConfig::stable(1e-3, 1e-3);
        cfg.max_steps = 10;
        let r = simulate_csbp(1.0, CsbpParams::canonical(), 1.0, &cfg, 1);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    fn laplace_check(cfg: SimConfig, n: u64) {
        let params = CsbpParams::canonical();
        let mut m = Moments::default();
        for i in 0..n {
            let mut rng = stream(11, Lane::Csbp, i);
            let (x1, _) = mass_and_extinction(&mut rng, 1.0, params, 1.0, &cfg).unwrap();
            m.push((-x1).exp());
        }
        let e = m.estimate();
        let want = csbp_laplace(1.0, 1.0, 1.0, params).unwrap();
        assert!(
            (e.mean - want).abs() < 4.0 * e.stderr,
            "{cfg:?}: {} vs {want} (se {})",
            e.mean,
            e.stderr
        );
    }

    #[test]
    fn stable_driver_laplace() {
        laplace_check(SimConfig::stable(1e-2, 1e-3), 4_000);
    }

    #[test]
    fn resolved_driver_laplace() {
        laplace_check(SimConfig::resolved(1e-2, 1e-6, 1e-2), 4_000);
    }

    #[test]
    fn reversed_boundary_mean_and_shape() {
        let cfg = SimConfig::resolved(1e-2, 1e-6, 1e-2);
        let mut m = Moments::default();
        for i in 0..1_500 {
            let mut rng = stream(12, Lane::Csbp, i);
            let z = simulate_reversed_boundary_with(&mut rng, 1.0, 50.0, &cfg).unwrap();
            z.validate().unwrap();
            assert_eq!(*z.times.last().unwrap(), 1.0);
            assert_eq!(z.times[0], 0.0);
            m.push((-z.last_value()).exp());
        }
        let e = m.estimate();
        let want = boundary_length_laplace(1.0, 1.0).unwrap();
        assert!(
            (e.mean - want).abs() < 4.0 * e.stderr,
            "{} vs {want} (se {})",
            e.mean,
            e.stderr
        );
    }

    #[test]
    fn reversal_places_jumps_as_downward_moves() {
        let cfg = SimConfig::resolved(1e-2, 1e-6, 1e-2);
        let z = simulate_reversed_boundary(1.0, 50.0, &cfg, 3).unwrap();
        for j in &z.jumps {
            // The mass changes at the start of the segment holding the jump.
            let i = z.index_at(j.time).unwrap();
            assert!(i >= 1);
            let (before, after) = (z.values[i - 1], z.values[i]);
            if j.size > 10.0 * 1e-2 * before {
                assert!(after < before, "jump at {} not downward", j.time);
            }
        }
    }
}
