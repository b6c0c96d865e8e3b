use std::f64::consts::PI;

use nalgebra::Matrix2;
use proptest::prelude::*;
use su_balance::elliptic::landen::jacobi_landen;
use su_balance::elliptic::{jacobi, quarter_period, Modulus};
use su_balance::heisenberg::{self, HeisenbergGeodesicParams, HeisenbergPoint};
use su_balance::pendulum::{classify, energy, fit_solution, solve_closed_form, PendulumParams};
use su_balance::sl2flow::{flow, flow_generator_exp, geodesic_ode, GroupPoint, ReducedState};
use su_balance::srgeom::{energy_split, momentum_bracket, ContactFrame3, HorizontalPath};

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn jacobi_identities(t in -20.0..20.0f64, k in 0.01..0.99f64) {
        let m = Modulus::new(k).unwrap();
        let e = jacobi(t, m).unwrap();
        prop_assert!(e.circle_residual().abs() <= 1e-10);
        prop_assert!(e.modulus_residual().abs() <= 1e-10);
        let (s, c, d) = jacobi_landen(t, m);
        prop_assert!((e.sn - s).abs() <= 1e-9 && (e.cn - c).abs() <= 1e-9 && (e.dn - d).abs() <= 1e-9);
    }

    #[test]
    fn jacobi_parity_and_half_period(t in 0.0..5.0f64, k in 0.05..0.95f64) {
        let m = Modulus::new(k).unwrap();
        let big_k = quarter_period(m).unwrap();
        let a = jacobi(t, m).unwrap();
        let b = jacobi(-t, m).unwrap();
        prop_assert!((a.sn + b.sn).abs() <= 1e-10);
        prop_assert!((a.cn - b.cn).abs() <= 1e-10);
        let shifted = jacobi(t + 2.0 * big_k, m).unwrap();
        prop_assert!((shifted.sn + a.sn).abs() <= 1e-9);
        prop_assert!((shifted.dn - a.dn).abs() <= 1e-9);
    }

    #[test]
    fn pendulum_closed_form_conserves_energy(
        omega in 0.3..3.0f64,
        theta0 in -3.0..3.0f64,
        thetadot0 in -5.0..5.0f64,
        t in 0.0..8.0f64,
    ) {
        let params = PendulumParams::new(omega, theta0, thetadot0).unwrap();
        prop_assume!(!classify(&params).is_equilibrium());
        let i0 = energy(&params).value();
        // Keep away from the separatrix, where the fit is ill-conditioned.
        prop_assume!((i0 - omega * omega).abs() > 1e-3 * omega * omega);
        let sol = fit_solution(&params).unwrap();
        prop_assert!((solve_closed_form(&sol, 0.0).unwrap() - theta0).abs() <= 1e-8);
        let h = 1e-4;
        let th = solve_closed_form(&sol, t).unwrap();
        let dth = (solve_closed_form(&sol, t + h).unwrap() - solve_closed_form(&sol, t - h).unwrap()) / (2.0 * h);
        let i = dth * dth / 4.0 + omega * omega * (th / 2.0).sin().powi(2);
        prop_assert!((i - i0).abs() <= 1e-6 * (1.0 + i0), "{} vs {}", i, i0);
    }

    #[test]
    fn energy_split_is_reversal_invariant(a in -3.0..3.0f64, b in -3.0..3.0f64, ell in 0.1..4.0f64) {
        let path = HorizontalPath::from_fn(ell, 2001, |t| {
            let th = a + b * t;
            [th.cos(), th.sin()]
        }).unwrap();
        let fwd = energy_split(&path).unwrap();
        let back = energy_split(&path.reversed()).unwrap();
        prop_assert!((fwd.e1 + fwd.e2 - 1.0).abs() <= 1e-9);
        prop_assert!((fwd.defect - back.defect).abs() <= 1e-12);
    }

    #[test]
    fn momentum_bracket_is_antisymmetric(p in prop::array::uniform3(-5.0..5.0f64), i in 0usize..3, j in 0usize..3) {
        for frame in [ContactFrame3::heisenberg(), ContactFrame3::special_contact()] {
            let pij = momentum_bracket(&frame, i, j, p).unwrap();
            let pji = momentum_bracket(&frame, j, i, p).unwrap();
            prop_assert!((pij + pji).abs() <= 1e-14);
        }
    }

    #[test]
    fn heisenberg_geodesics_have_unit_speed(v0 in -8.0..8.0f64, theta0 in -PI..PI, ell in 0.1..2.0f64) {
        let params = HeisenbergGeodesicParams::new(v0, theta0, HeisenbergPoint::origin(), ell).unwrap();
        let report = heisenberg::balance_report(&params).unwrap();
        prop_assert!((report.e1 + report.e2 - 1.0).abs() <= 1e-9);
        prop_assert!((report.length - ell).abs() <= 1e-12);
        let expected = if v0 * ell == 0.0 {
            theta0.cos().powi(2) - theta0.sin().powi(2)
        } else {
            ((2.0 * v0 * ell + 2.0 * theta0).sin() - (2.0 * theta0).sin()) / (2.0 * v0 * ell)
        };
        prop_assert!((report.defect - expected).abs() <= 1e-8, "{} vs {}", report.defect, expected);
    }

    #[test]
    fn flow_is_a_one_parameter_group(s in -2.0..2.0f64, t in -2.0..2.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = GroupPoint::renormalized(Matrix2::new(1.0 + a * b, a, b, 1.0)).unwrap();
        let lhs = flow(&flow(&g, s), t);
        let rhs = flow(&g, s + t);
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() <= 1e-10 * rhs.matrix().norm());
        prop_assert!((flow_generator_exp(s).determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn reduced_geodesic_field_keeps_unit_speed(theta in -PI..PI, px in -10.0..10.0f64) {
        let state = ReducedState { g: GroupPoint::identity(), theta, px };
        let d = geodesic_ode(&state);
        let [_, py, pz] = state.momentum();
        prop_assert!((py * py + pz * pz - 1.0).abs() <= 1e-14);
        prop_assert!((d.theta_dot + px).abs() <= 1e-14);
        prop_assert!((d.px_dot + (2.0 * theta).cos()).abs() <= 1e-14);
    }
}
