use std::f64::consts::TAU;

use proptest::prelude::*;
use starklab_core::potentials::PotentialSpec;
use starklab_core::transforms::{
    effective_potential, modified_prufer_rhs, phi_from_prufer, phi_pair_of_u, prufer_from_phi, prufer_rhs,
    u_pair_of_phi, x_of_xi, xi_of_x, PruferState,
};
use starklab_core::LIOUVILLE_C;

proptest! {
    #[test]
    fn liouville_roundtrip(x in 1e-3f64..1e8) {
        let back = x_of_xi(xi_of_x(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-13 * x);
    }

    #[test]
    fn phi_u_roundtrip(x in 0.1f64..1e6, u in -1e3f64..1e3, du in -1e3f64..1e3) {
        let (p, dp) = phi_pair_of_u(x, u, du);
        let (u2, du2) = u_pair_of_phi(x, p, dp);
        prop_assert!((u2 - u).abs() <= 1e-12 * (u.abs() + du.abs() / x.sqrt() + 1e-300));
        prop_assert!((du2 - du).abs() <= 1e-11 * (du.abs() + u.abs() * x.sqrt() + 1e-300));
    }

    #[test]
    fn prufer_roundtrip(log_r in -50.0f64..50.0, theta in -100.0f64..100.0) {
        let s = PruferState { log_r, theta };
        let (p, dp) = phi_from_prufer(s);
        let back = prufer_from_phi(p, dp).unwrap();
        prop_assert!((back.log_r - log_r).abs() <= 1e-14 * log_r.abs().max(1.0));
        let d = (back.theta - theta).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) < 1e-12);
    }

    #[test]
    fn norm_derivative_two_ways(theta in -10.0f64..10.0, log_r in -3.0f64..3.0, v in -5.0f64..5.0) {
        let s = PruferState { log_r, theta };
        let (dlog, _) = prufer_rhs(theta, v);
        let (p, dp) = phi_from_prufer(s);
        let r2 = p * p + dp * dp;
        // φ″ = (V − 1)φ
        let direct = 2.0 * p * dp + 2.0 * dp * (v - 1.0) * p;
        prop_assert!((2.0 * r2 * dlog - direct).abs() <= 1e-12 * r2.max(1.0) * v.abs().max(1.0));
    }

    #[test]
    fn linear_in_energy(xi in 1.0f64..1e6, e in -5.0f64..5.0) {
        let spec = PotentialSpec::power_decay(1.0, 0.3).unwrap();
        let h = 1e-3;
        let slope = (effective_potential(&spec, xi, e + h).unwrap() - effective_potential(&spec, xi, e - h).unwrap()) / (2.0 * h);
        let expect = -1.0 / (LIOUVILLE_C * xi.powf(2.0 / 3.0));
        prop_assert!((slope - expect).abs() <= 1e-10, "{} vs {}", slope, expect);
    }

    #[test]
    fn free_rotation_agrees(theta in -10.0f64..10.0) {
        prop_assert_eq!(prufer_rhs(theta, 0.0), (0.0, 1.0));
        let (a, b) = modified_prufer_rhs(theta, 0.0, 0.0).unwrap();
        prop_assert!(a == 0.0 && (b - 1.0).abs() < 1e-15);
    }
}

#[test]
fn below_transform_region_rejected() {
    assert!(effective_potential(&PotentialSpec::Zero, 0.5, 0.0).is_err());
    assert!(prufer_from_phi(0.0, 0.0).is_err());
}
