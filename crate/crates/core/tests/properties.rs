use proptest::prelude::*;

use semitoric_core::critical::{branch_path, Branch};
use semitoric_core::delzant::octagon;
use semitoric_core::manifold::{
    apply_torus_action, from_chart, j_flow, to_chart, AmbientPoint, ChartPoint,
};
use semitoric_core::momentum::{
    h_value, j_value, momentum_map, x_function, y_function, Params, DEFAULT_GAMMA,
};
use semitoric_core::numerics::{eig4_general, mat_mul, omega_st_inv, Mat4};

fn chart_point() -> impl Strategy<Value = ChartPoint> {
    (1usize..=8, prop::array::uniform4(-3.0f64..3.0))
        .prop_map(|(nu, coords)| ChartPoint { nu, coords })
        .prop_filter("interior", |cp| cp.min_radicand() > 1e-3)
}

fn manifold_point() -> impl Strategy<Value = AmbientPoint> {
    chart_point().prop_map(|cp| from_chart(&cp).unwrap())
}

fn angles() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-std::f64::consts::PI..std::f64::consts::PI)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chart_points_lie_on_manifold(cp in chart_point()) {
        let p = from_chart(&cp).unwrap();
        prop_assert!(p.max_residual() < 1e-12);
        let back = to_chart(&p, cp.nu).unwrap();
        for k in 0..4 {
            prop_assert!((back.coords[k] - cp.coords[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn gauge_action_is_invisible(cp in chart_point(), g in angles()) {
        let p = from_chart(&cp).unwrap();
        let q = apply_torus_action(&p, &g);
        prop_assert!(q.max_residual() < 1e-12);
        prop_assert!((j_value(&p) - j_value(&q)).abs() < 1e-12);
        prop_assert!((h_value(&p) - h_value(&q)).abs() < 1e-12);
        prop_assert!((x_function(&p) - x_function(&q)).abs() < 1e-9);
        prop_assert!((y_function(&p) - y_function(&q)).abs() < 1e-9);
        let back = to_chart(&q, cp.nu).unwrap();
        for k in 0..4 {
            prop_assert!((back.coords[k] - cp.coords[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn j_flow_preserves_momentum(p in manifold_point(), s in -10.0f64..10.0, t in 0.0f64..1.0) {
        let params = Params::new(t, DEFAULT_GAMMA).unwrap();
        let a = momentum_map(&p, &params);
        let b = momentum_map(&j_flow(&p, s), &params);
        prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-10);
    }

    #[test]
    fn toric_image_lies_in_octagon(p in manifold_point()) {
        let params = Params::new(0.0, DEFAULT_GAMMA).unwrap();
        prop_assert!(octagon().contains_with_slack(momentum_map(&p, &params), 1e-10));
    }

    #[test]
    fn hamiltonian_spectra_are_symmetric(entries in prop::array::uniform10(-2.0f64..2.0)) {
        let mut s: Mat4 = [[0.0; 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                s[i][j] = entries[k];
                s[j][i] = entries[k];
                k += 1;
            }
        }
        let eig = eig4_general(&mat_mul(&omega_st_inv(), &s)).unwrap();
        for l in eig.0 {
            // -l and conj(l) are eigenvalues too.
            let tol = 1e-6 * (1.0 + l.norm());
            prop_assert!(eig.0.iter().any(|m| (m + l).norm() < tol));
            prop_assert!(eig.0.iter().any(|m| (m - l.conj()).norm() < tol));
        }
    }

    #[test]
    fn v_branches_mirror_u_branches(t in 0.0f64..1.0, gamma in 1e-3f64..(1.0 / 48.0)) {
        let u_plus = branch_path(Branch::UPlus, gamma, &[t]).unwrap()[0];
        let u_minus = branch_path(Branch::UMinus, gamma, &[t]).unwrap()[0];
        let v_minus = branch_path(Branch::VMinus, gamma, &[t]).unwrap()[0];
        let v_plus = branch_path(Branch::VPlus, gamma, &[t]).unwrap()[0];
        prop_assert!((u_plus + v_minus).abs() < 1e-10);
        prop_assert!((u_minus + v_plus).abs() < 1e-10);
    }
}
