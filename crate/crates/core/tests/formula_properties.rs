use bphull_core::formulas::*;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn laplace_transforms_are_in_unit_interval(r in 0.01f64..20.0, lam in 0.0f64..1e4, mu in 1e-8f64..1e6) {
        let b = boundary_length_laplace(r, lam).unwrap();
        prop_assert!(b > 0.0 && b <= 1.0);
        let h = hull_volume_laplace(r, mu).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
        let g = hull_volume_laplace_given_boundary(r, lam, mu).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        let x = xi_laplace(lam).unwrap();
        prop_assert!(x > 0.0 && x <= 1.0);
    }

    #[test]
    fn hull_laplace_decreases_in_mu(r in 0.1f64..5.0, mu in 1e-4f64..1e3, f in 1.01f64..4.0) {
        prop_assert!(hull_volume_laplace(r, mu * f).unwrap() <= hull_volume_laplace(r, mu).unwrap());
    }

    #[test]
    fn csbp_semigroup(t in 0.0f64..5.0, s in 0.0f64..5.0, lam in 1e-3f64..1e3, c in 0.1f64..5.0) {
        let p = CsbpParams::new(c).unwrap();
        let inner = csbp_laplace_exponent(s, lam, p).unwrap();
        let composed = csbp_laplace_exponent(t, inner, p).unwrap();
        let direct = csbp_laplace_exponent(t + s, lam, p).unwrap();
        prop_assert!(rel(composed, direct) < 1e-12);
    }

    #[test]
    fn volume_flow_is_a_semigroup(a in 0.05f64..3.0, b in 0.05f64..3.0, lam in 0.01f64..10.0, mu in 0.01f64..10.0) {
        let inner = u_joint(b, lam, mu).unwrap();
        let composed = u_joint(a, inner, mu).unwrap();
        let direct = u_joint(a + b, lam, mu).unwrap();
        prop_assert!(rel(composed, direct) < 1e-10, "{} vs {}", composed, direct);
    }

    #[test]
    fn u_inf_inverts_theta(mu in 1e-3f64..1e3, f in 1.0001f64..1e4) {
        let lam = f * (mu / 2.0).sqrt();
        let back = u_inf(theta(mu, lam).unwrap(), mu).unwrap();
        prop_assert!(rel(back, lam) < 1e-12);
    }

    #[test]
    fn u_joint_matches_shifted_u_inf(x in 0.01f64..5.0, mu in 0.01f64..10.0, f in 1.001f64..100.0) {
        let lam = f * (mu / 2.0).sqrt();
        let shifted = u_inf(x + theta(mu, lam).unwrap(), mu).unwrap();
        prop_assert!(rel(u_joint(x, lam, mu).unwrap(), shifted) < 1e-12);
    }

    #[test]
    fn snake_tail_scales(x in -10.0f64..10.0, gap in 0.01f64..10.0, k in 0.1f64..10.0) {
        let y = x - gap;
        let lhs = snake_min_tail(k * x, k * y).unwrap();
        let rhs = snake_min_tail(x, y).unwrap() / (k * k);
        prop_assert!(rel(lhs, rhs) < 1e-12);
    }

    #[test]
    fn exit_laplace_is_bounded_by_exit_mass(x in 0.1f64..10.0, a in -5.0f64..0.09, mu in 0.0f64..1e6) {
        prop_assert!(exit_laplace(x, a, mu).unwrap() <= snake_min_tail(x, a).unwrap() * (1.0 + 1e-15));
    }

    #[test]
    fn conditioned_kernel_is_a_transform(x in 0.01f64..10.0, s in 0.0f64..1.0, dt in 0.01f64..1.0, gap in 0.01f64..2.0, lam in 0.0f64..100.0) {
        let t = s + dt;
        let v = conditioned_kernel_laplace(x, s, t, t + gap, lam, CsbpParams::canonical()).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
    }

    #[test]
    fn conditional_boundary_is_a_transform(a in 0.01f64..3.0, gap in 0.01f64..3.0, z in 0.0f64..20.0, lam in 0.0f64..100.0) {
        let v = conditional_boundary_laplace(a, a + gap, z, lam).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
    }

    #[test]
    fn truncated_exit_is_monotone(x in 1.01f64..10.0, lam in 0.0f64..100.0) {
        let lo = truncated_exit_laplace(x, 1.0, lam).unwrap();
        let hi = truncated_exit_laplace(x, 1.0, lam * 2.0 + 1e-3).unwrap();
        prop_assert!(lo >= 0.0 && lo <= hi);
    }

    #[test]
    fn evaluation_is_pure(r in 0.01f64..20.0, ell in 0.0f64..50.0, mu in 1e-6f64..1e4) {
        let a = hull_volume_laplace_given_boundary(r, ell, mu).unwrap();
        let b = hull_volume_laplace_given_boundary(r, ell, mu).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}
