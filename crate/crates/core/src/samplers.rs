//! Random variate generators used by the simulators.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use libm::{cbrt, cos, erfc, exp, sin, sqrt};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

/// Uniform on the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Poisson count with mean `lambda >= 0`.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    match Poisson::new(lambda) {
        Ok(p) => p.sample(rng) as u64,
        Err(_) => 0,
    }
}

/// Spectrally positive 3/2-stable variable `S` with
/// `E[exp(-g S)] = exp(sqrt(2) g^{3/2})` (Chambers–Mallows–Stuck).
pub fn stable_three_halves<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let v = PI * open_unit(rng) - FRAC_PI_2;
    let w = exp1(rng);
    let cv = cos(v);
    cbrt(2.0) * sin(1.5 * v - FRAC_PI_4) / cbrt(cv * cv) * cbrt(w / cos(FRAC_PI_4 - 0.5 * v))
}

/// Volume mark: reciprocal of a chi-square variable with three degrees of freedom.
pub fn xi_reciprocal_chi2<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let (a, b, c) = (std_normal(rng), std_normal(rng), std_normal(rng));
    1.0 / (a * a + b * b + c * c)
}

/// Upper tail of the Gamma(3/2, 1) law.
fn gamma_three_halves_sf(v: f64) -> f64 {
    erfc(sqrt(v)) + 2.0 * sqrt(v / PI) * exp(-v)
}

/// Volume mark by numerical inversion of its distribution function.
///
/// `P(xi <= x) = Q(3/2, 1/(2x))`, so we solve `Q(3/2, v) = U` for `v` and
/// return `1/(2v)`. Kept as an independent route to the mark law.
pub fn xi_inversion<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u = open_unit(rng);
    // Safeguarded Newton in log v; Q is decreasing in v.
    let (mut lo, mut hi) = (-80.0f64, 7.0f64);
    let mut t = 0.0f64;
    for _ in 0..200 {
        let v = exp(t);
        let f = gamma_three_halves_sf(v) - u;
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let dens = 2.0 / sqrt(PI) * sqrt(v) * exp(-v);
        let step = f / (dens * v);
        let mut next = t + step;
        if !(next > lo && next < hi) || !step.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-14 * (1.0 + t.abs()) || hi - lo < 1e-15 {
            t = next;
            break;
        }
        t = next;
    }
    0.5 / exp(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::xi_cdf;
    use crate::rng::{stream, Lane};

    #[test]
    fn open_unit_range() {
        let mut rng = stream(1, Lane::Test, 0);
        for _ in 0..10_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn stable_laplace_transform() {
        // E[exp(-g S)] = exp(sqrt(2) g^{3/2}); check at g = 0.5 and g = 1.
        let mut rng = stream(2, Lane::Test, 0);
        let n = 400_000;
        let xs: alloc::vec::Vec<f64> = (0..n).map(|_| stable_three_halves(&mut rng)).collect();
        for &g in &[0.5f64, 1.0] {
            let vals: alloc::vec::Vec<f64> = xs.iter().map(|x| (-g * x).exp()).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let want = (2f64.sqrt() * g.powf(1.5)).exp();
            assert!(
                (mean - want).abs() < 4.0 * se,
                "g={g}: {mean} vs {want} (se {se})"
            );
        }
    }

    #[test]
    fn inversion_hits_target_quantiles() {
        let mut rng = stream(3, Lane::Test, 0);
        for _ in 0..2_000 {
            let mut probe = rng.clone();
            let u = open_unit(&mut probe);
            let x = xi_inversion(&mut rng);
            assert!((xi_cdf(x).unwrap() - u).abs() < 1e-12, "x={x}, u={u}");
        }
    }

    #[test]
    fn poisson_zero_mean() {
        let mut rng = stream(4, Lane::Test, 0);
        assert_eq!(poisson(&mut rng, 0.0), 0);
    }
}
