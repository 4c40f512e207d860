//! Hull volume as a decoration of boundary-length jumps.
//!
//! Each jump of size `y` of the boundary process carries an independent mark
//! `xi` (reciprocal of a chi-square(3) variable) and contributes `xi * y^2` to
//! the volume.

use alloc::vec::Vec;

use rand::Rng;

use crate::csbp_sim::{simulate_csbp_with, SimConfig};
use crate::error::{ensure, Result};
use crate::formulas::CsbpParams;
use crate::path::{JumpRecord, SampledPath};
use crate::rng::{stream, Lane};
use crate::samplers::xi_reciprocal_chi2;

/// A jump together with its volume mark.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mark {
    pub jump: JumpRecord,
    pub xi: f64,
}

impl Mark {
    pub fn volume(&self) -> f64 {
        self.xi * self.jump.size * self.jump.size
    }
}

/// Whether a jump at the observation time counts towards the volume there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Counting {
    /// `V_r` sums jumps at times `<= r`.
    Inclusive,
    /// `Y_a` sums jumps at times `< a`.
    Strict,
}

/// Boundary path, volume on the same grid and the marks that produced it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullSample {
    pub boundary: SampledPath,
    pub volume: Vec<f64>,
    /// Marks in enumeration order: decreasing jump size, ties by time.
    pub marks: Vec<Mark>,
    pub counting: Counting,
}

impl HullSample {
    /// Volume at time `r`, counting marks per [`Counting`].
    pub fn volume_at(&self, r: f64) -> f64 {
        self.marks
            .iter()
            .filter(|m| match self.counting {
                Counting::Inclusive => m.jump.time <= r,
                Counting::Strict => m.jump.time < r,
            })
            .map(Mark::volume)
            .sum()
    }

    /// Expected volume of the sub-threshold jumps up to `r` (marks have mean 1).
    pub fn unresolved_volume_at(&self, r: f64) -> f64 {
        self.boundary.unresolved_sq_at(r).unwrap_or(0.0)
    }

    /// Resolved volume plus the expected volume of the sub-threshold jumps.
    pub fn compensated_volume_at(&self, r: f64) -> f64 {
        self.volume_at(r) + self.unresolved_volume_at(r)
    }

    /// Bound on `|E[exp(-mu S)] - exp(-mu E[S])|` for the sub-threshold volume
    /// `S` up to `r`, given the path.
    ///
    /// Writing `G = int (mu s - 1 + exp(-mu s)) n(ds)` for the Lévy measure `n`
    /// of `S`, the gap is at most `G`. The mark tail gives
    /// `E[min(b xi, (b xi)^2 / 2)] <= 2 b^{3/2} / sqrt(pi)`, and the cubic
    /// moment of jumps below a threshold `e` is `e/3` times the quadratic one,
    /// so `G <= 2 mu^{3/2} e_max U_r / (3 sqrt(pi)) =: H`. Since the gap equals
    /// `exp(-(mu U_r - G)) (1 - exp(-G))`, it is at most
    /// `exp(-max(0, mu U_r - H)) (1 - exp(-H))`.
    pub fn compensation_gap_bound(&self, r: f64, mu: f64) -> f64 {
        let p = &self.boundary;
        let upto = p.index_at(r).map_or(0, |i| i + 1);
        let top = p.values[..upto]
            .iter()
            .chain(&p.left_limits[..upto])
            .copied()
            .chain(p.value_at(r))
            .fold(0.0f64, f64::max);
        let e_max = p.meta.jump_threshold.max(p.meta.jump_threshold_rel * top);
        let u = self.unresolved_volume_at(r);
        let h = 2.0 * mu * libm::sqrt(mu) * e_max * u / (3.0 * libm::sqrt(core::f64::consts::PI));
        libm::exp(-(mu * u - h).max(0.0)) * -libm::expm1(-h)
    }

    /// Checks monotonicity and that each volume increment is the sum of the
    /// marks falling in the corresponding grid interval.
    pub fn validate(&self) -> Result<()> {
        self.boundary.validate()?;
        let g = &self.boundary.times;
        ensure!(
            self.volume.len() == g.len(),
            Structural,
            "volume and grid lengths differ"
        );
        ensure!(
            self.volume.windows(2).all(|w| w[0] <= w[1]),
            Structural,
            "volume decreases"
        );
        for j in 0..g.len() {
            let prev = if j == 0 { 0.0 } else { self.volume[j - 1] };
            let lo = if j == 0 { f64::NEG_INFINITY } else { g[j - 1] };
            let expected: f64 = self
                .marks
                .iter()
                .filter(|m| match self.counting {
                    Counting::Inclusive => m.jump.time > lo && m.jump.time <= g[j],
                    Counting::Strict => m.jump.time >= lo && m.jump.time < g[j],
                })
                .map(Mark::volume)
                .sum();
            let inc = self.volume[j] - prev;
            ensure!(
                (inc - expected).abs() <= 1e-12 * self.volume[j].max(1.0),
                Structural,
                "volume increment {inc} at grid {j} does not match marks ({expected})"
            );
        }
        Ok(())
    }
}

fn decorate_inner<R: Rng + ?Sized>(
    boundary: SampledPath,
    rng: &mut R,
    counting: Counting,
) -> HullSample {
    let mut order: Vec<JumpRecord> = boundary.jumps.clone();
    order.sort_by(|a, b| b.size.total_cmp(&a.size).then(a.time.total_cmp(&b.time)));
    let marks: Vec<Mark> = order
        .into_iter()
        .map(|jump| Mark {
            jump,
            xi: xi_reciprocal_chi2(rng),
        })
        .collect();

    let mut by_time: Vec<(f64, f64)> = marks.iter().map(|m| (m.jump.time, m.volume())).collect();
    by_time.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut volume = Vec::with_capacity(boundary.times.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &t in &boundary.times {
        while k < by_time.len()
            && match counting {
                Counting::Inclusive => by_time[k].0 <= t,
                Counting::Strict => by_time[k].0 < t,
            }
        {
            acc += by_time[k].1;
            k += 1;
        }
        volume.push(acc);
    }
    HullSample {
        boundary,
        volume,
        marks,
        counting,
    }
}

/// Attaches marks drawn from `rng` to the jumps of `boundary`.
pub fn decorate_with<R: Rng + ?Sized>(boundary: SampledPath, rng: &mut R) -> HullSample {
    decorate_inner(boundary, rng, Counting::Inclusive)
}

/// `V_r = sum over jumps s_i <= r of xi_i (dZ_{s_i})^2`, marks seeded by `seed`.
pub fn decorate(boundary: SampledPath, seed: u64) -> HullSample {
    let replicate = boundary.meta.replicate;
    decorate_with(boundary, &mut stream(seed, Lane::Marks, replicate))
}

/// Forward mass/volume pair from `x0`, with `Y_a` counting jumps strictly
/// before `a`. The path and the marks use separate streams of `rng_path` and
/// `rng_marks`.
pub fn forward_pair_with<R: Rng + ?Sized, M: Rng + ?Sized>(
    rng_path: &mut R,
    rng_marks: &mut M,
    x0: f64,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<HullSample> {
    let path = simulate_csbp_with(rng_path, x0, CsbpParams::canonical(), horizon, cfg)?;
    Ok(decorate_inner(path, rng_marks, Counting::Strict))
}

pub fn forward_pair(x0: f64, horizon: f64, cfg: &SimConfig, seed: u64) -> Result<HullSample> {
    let mut sample = forward_pair_with(
        &mut stream(seed, Lane::Csbp, 0),
        &mut stream(seed, Lane::Marks, 0),
        x0,
        horizon,
        cfg,
    )?;
    sample.boundary.meta.seed = seed;
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csbp_sim::simulate_reversed_boundary;
    use crate::path::PathMeta;
    use alloc::vec;

    fn cfg() -> SimConfig {
        SimConfig::resolved(1e-2, 1e-6, 1e-2)
    }

    #[test]
    fn no_jumps_no_volume() {
        let p = SampledPath {
            times: vec![0.0, 0.5, 1.0],
            values: vec![1.0, 2.0, 3.0],
            left_limits: vec![1.0, 1.0, 2.0],
            jumps: vec![],
            unresolved_sq: vec![0.0; 3],
            meta: PathMeta {
                seed: 0,
                replicate: 0,
                dt: 0.5,
                jump_threshold: 1.0,
                jump_threshold_rel: 0.0,
            },
        };
        let h = decorate(p, 1);
        assert!(h.volume.iter().all(|&v| v == 0.0));
        h.validate().unwrap();
    }

    #[test]
    fn decorated_paths_are_jump_locked() {
        for seed in 0..10 {
            let z = simulate_reversed_boundary(1.0, 50.0, &cfg(), seed).unwrap();
            let h = decorate(z, seed);
            h.validate().unwrap();
            assert!(
                (h.volume_at(1.0) - h.volume.last().unwrap()).abs()
                    <= 1e-12 * h.volume_at(1.0).max(1.0)
            );
            assert!(h.marks.windows(2).all(|w| w[0].jump.size >= w[1].jump.size));
        }
    }

    #[test]
    fn forward_pair_uses_strict_counting() {
        let h = forward_pair(1.0, 1.0, &cfg(), 4).unwrap();
        h.validate().unwrap();
        if let Some(m) = h.marks.first() {
            let t = m.jump.time;
            assert!(h.volume_at(t) <= h.volume_at(t + 1e-12) - m.volume() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn zero_start_pair_is_empty() {
        let h = forward_pair(0.0, 1.0, &cfg(), 4).unwrap();
        assert!(h.marks.is_empty());
        assert!(h.boundary.values.iter().all(|&v| v == 0.0));
        assert!(h.volume.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mark_tail_bound_behind_gap_bound() {
        use crate::formulas::xi_density;
        use crate::quad::{integrate, integrate_to_infinity, QuadConfig};
        for &b in &[1e-4, 1e-2, 0.3, 1.0, 5.0] {
            let f = |x: f64| (b * x).min(0.5 * b * b * x * x) * xi_density(x).unwrap();
            let knee = 2.0 / b;
            let lhs = integrate(f, 0.0, knee, QuadConfig::default())
                .unwrap()
                .value
                + integrate_to_infinity(f, knee, QuadConfig::default())
                    .unwrap()
                    .value;
            let rhs = 2.0 * b * b.sqrt() / core::f64::consts::PI.sqrt();
            assert!(lhs <= rhs, "b={b}: {lhs} > {rhs}");
            if b < 1e-2 {
                assert!(lhs > 0.5 * rhs, "b={b}: bound is loose, {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn gap_bound_scales_with_unresolved_volume() {
        let z = simulate_reversed_boundary(1.0, 50.0, &cfg(), 2).unwrap();
        let h = decorate(z, 2);
        let u = h.unresolved_volume_at(1.0);
        assert!(u > 0.0);
        assert_eq!(h.compensated_volume_at(1.0), h.volume_at(1.0) + u);
        let g1 = h.compensation_gap_bound(1.0, 1.0);
        assert!(g1 > 0.0 && g1 < u && g1 < 1.0);
        // For small unresolved volume the bound is close to its linear part.
        let lin = |mu: f64| h.compensation_gap_bound(1.0, mu) * libm::exp(mu * u);
        assert!(lin(1e-3) > 0.0);
        assert!((lin(4e-3) / lin(1e-3) - 8.0).abs() < 1e-3);
    }

    #[test]
    fn decoration_is_deterministic() {
        let z = simulate_reversed_boundary(1.0, 50.0, &cfg(), 9).unwrap();
        assert_eq!(decorate(z.clone(), 3), decorate(z.clone(), 3));
        let a = decorate(z.clone(), 3);
        let b = decorate(z, 4);
        if !a.marks.is_empty() {
            assert_ne!(a.marks, b.marks);
        }
    }
}
