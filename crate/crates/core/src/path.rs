//! Sampled càdlàg paths and their jump lists.

use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// A resolved jump: occurrence time and absolute size.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
}

/// How a path was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathMeta {
    pub seed: u64,
    pub replicate: u64,
    pub dt: f64,
    /// Absolute jump threshold.
    pub jump_threshold: f64,
    /// Relative jump threshold (fraction of the current mass).
    pub jump_threshold_rel: f64,
}

/// A càdlàg path sampled on a strictly increasing grid.
///
/// `values[i]` is the value at `times[i]` and `left_limits[i]` the limit from
/// the left there, so a jump at a grid point shows as a gap between the two.
/// Between grid points the path runs geometrically from `values[i]` to
/// `left_limits[i+1]` (linearly if either is 0); a step function has
/// `left_limits[i+1] == values[i]`. `unresolved_sq[i]` is the expected sum of
/// squared sub-threshold jumps accumulated on `[times[0], times[i]]`; it is the
/// volume budget for jumps that were not resolved individually.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampledPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub left_limits: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    pub unresolved_sq: Vec<f64>,
    pub meta: PathMeta,
}

impl SampledPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last grid point `<= t`, or `None` before the grid.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&s| s <= t);
        k.checked_sub(1)
    }

    /// Value at `t`, interpolated between grid points; the last value extends
    /// past the grid.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.index_at(t)?;
        let a = self.values[i];
        if i + 1 == self.times.len() || t == self.times[i] {
            return Some(a);
        }
        let b = self.left_limits[i + 1];
        let f = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Some(if a > 0.0 && b > 0.0 {
            a * libm::pow(b / a, f)
        } else {
            a + (b - a) * f
        })
    }

    pub fn unresolved_sq_at(&self, t: f64) -> Option<f64> {
        self.index_at(t).map(|i| self.unresolved_sq[i])
    }

    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Checks grid monotonicity, nonnegativity, absorption and jump placement.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        ensure!(n > 0, Structural, "empty path");
        ensure!(
            self.values.len() == n && self.left_limits.len() == n && self.unresolved_sq.len() == n,
            Structural,
            "column lengths differ: {} times, {} values, {} left limits, {} budgets",
            n,
            self.values.len(),
            self.left_limits.len(),
            self.unresolved_sq.len()
        );
        ensure!(
            self.times.windows(2).all(|w| w[0] < w[1]),
            Structural,
            "time grid is not strictly increasing"
        );
        ensure!(
            self.values
                .iter()
                .chain(&self.left_limits)
                .all(|&v| v >= 0.0 && v.is_finite()),
            Structural,
            "negative or non-finite value"
        );
        // A reversed path starts at 0, so absorption is checked after the
        // first point.
        if let Some(z) = self
            .values
            .iter()
            .skip(1)
            .position(|&v| v == 0.0)
            .map(|z| z + 1)
        {
            ensure!(
                self.values[z..].iter().all(|&v| v == 0.0),
                Structural,
                "path leaves 0 after absorption"
            );
            let t0 = self.times[z];
            ensure!(
                self.jumps.iter().all(|j| j.time <= t0),
                Structural,
                "jump after absorption at {t0}"
            );
        }
        let (lo, hi) = (self.times[0], self.times[n - 1]);
        ensure!(
            self.jumps
                .iter()
                .all(|j| j.time >= lo && j.time <= hi && j.size > 0.0),
            Structural,
            "jump outside [{lo}, {hi}] or with nonpositive size"
        );
        Ok(())
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Streaming mean/variance accumulator (Welford), mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> McEstimate {
        let se = if self.n < 2 {
            f64::INFINITY
        } else {
            libm::sqrt(self.variance() / self.n as f64)
        };
        McEstimate {
            mean: self.mean,
            stderr: se,
            n: self.n,
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn meta() -> PathMeta {
        PathMeta {
            seed: 0,
            replicate: 0,
            dt: 0.1,
            jump_threshold: 0.01,
            jump_threshold_rel: 0.0,
        }
    }

    #[test]
    fn right_continuous_lookup() {
        let p = SampledPath {
            times: vec![0.0, 1.0, 2.0],
            values: vec![3.0, 4.0, 0.0],
            left_limits: vec![3.0, 3.0, 4.0],
            jumps: vec![],
            unresolved_sq: vec![0.0; 3],
            meta: meta(),
        };
        assert_eq!(p.value_at(-0.1), None);
        assert_eq!(p.value_at(0.0), Some(3.0));
        assert_eq!(p.value_at(0.999), Some(3.0));
        assert_eq!(p.value_at(1.0), Some(4.0));
        assert_eq!(p.value_at(7.0), Some(0.0));
        p.validate().unwrap();
    }

    #[test]
    fn interpolation_is_geometric_between_grid_points() {
        let p = SampledPath {
            times: vec![0.0, 1.0, 2.0],
            values: vec![1.0, 2.0, 0.0],
            left_limits: vec![1.0, 4.0, 0.0],
            jumps: vec![],
            unresolved_sq: vec![0.0; 3],
            meta: meta(),
        };
        assert!((p.value_at(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(p.value_at(1.0), Some(2.0));
        assert!((p.value_at(1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((p.value_at(1.75).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn validation_catches_resurrection() {
        let p = SampledPath {
            times: vec![0.0, 1.0, 2.0],
            values: vec![3.0, 0.0, 1.0],
            left_limits: vec![3.0, 3.0, 0.0],
            jumps: vec![],
            unresolved_sq: vec![0.0; 3],
            meta: meta(),
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn merged_moments_match_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let all: Moments = xs.iter().copied().collect();
        let mut a: Moments = xs[..37].iter().copied().collect();
        let b: Moments = xs[37..].iter().copied().collect();
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-14);
    }
}
