//! Independent checks: each test recomputes a quantity by a route that shares
//! no code with the library path it checks.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semitoric_core::critical::{
    branch_hessian_entries, classify_rank_one_extremal, classify_rank_zero, f_poly, f_poly_deriv,
    fixed_points, fixed_points_along, g_poly, hessian_ht_chart, ht_in_chart, ht_jet, j_in_chart,
    j_jet, p_point, p_poly, solve_branch, static_fixed_points, transition_times, Branch, Family,
    FixedPointLabel, SingularityType,
};
use semitoric_core::delzant::{octagon, verify_delzant, DelzantPolygon};
use semitoric_core::fibre::{
    fibre_mesh, fibre_sampler_numeric, pinched_fibre_point, verify_fibre_samples, Sheet,
};
use semitoric_core::manifold::{
    best_chart, embedding_jacobian, from_chart, from_reduced, random_interior_chart_point,
    to_chart, vanishing_pattern, AmbientPoint, ChartPoint, ReducedCoords,
};
use semitoric_core::momentum::{
    ht_value, profile_x, reduced_height, x_function, z_function, Params, DEFAULT_GAMMA,
};
use semitoric_core::numerics::{eig4_general, fd_gradient, mat_add, mat_mul, omega_st_inv, Mat4};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `det(m - lambda I)` by Gaussian elimination with partial pivoting.
fn shifted_det(m: &Mat4, lambda: Complex64) -> Complex64 {
    let mut a: [[Complex64; 4]; 4] =
        std::array::from_fn(|i| std::array::from_fn(|j| Complex64::new(m[i][j], 0.0)));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..4 {
        let p = (c..4)
            .max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm()))
            .unwrap();
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c];
        det *= piv;
        if piv.norm() == 0.0 {
            return det;
        }
        for r in c + 1..4 {
            let f = a[r][c] / piv;
            for k in c..4 {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    det
}

#[test]
fn eigenvalues_annihilate_shifted_determinant() {
    let mut r = rng(1);
    for _ in 0..200 {
        let m: Mat4 = std::array::from_fn(|_| std::array::from_fn(|_| r.gen_range(-2.0..2.0)));
        let eig = eig4_general(&m).unwrap();
        let trace: f64 = (0..4).map(|i| m[i][i]).sum();
        let sum: Complex64 = eig.0.iter().sum();
        assert!((sum.re - trace).abs() < 1e-9 && sum.im.abs() < 1e-9);
        let norm: f64 = m.iter().flatten().map(|x| x.abs()).sum();
        for l in eig.0 {
            let scale = (norm + l.norm()).powi(4);
            assert!(
                shifted_det(&m, l).norm() / scale < 1e-10,
                "{l} is not an eigenvalue of {m:?}"
            );
        }
    }
}

#[test]
fn embedding_jacobian_matches_finite_differences() {
    let mut r = rng(2);
    let h = 1e-6;
    for nu in 1..=8 {
        for _ in 0..20 {
            let cp = random_interior_chart_point(nu, &mut r, 0.5);
            let jac = embedding_jacobian(&cp).unwrap();
            for a in 0..4 {
                let (mut up, mut dn) = (cp, cp);
                up.coords[a] += h;
                dn.coords[a] -= h;
                let (pu, pd) = (from_chart(&up).unwrap(), from_chart(&dn).unwrap());
                for k in 0..8 {
                    let d = (pu.z[k] - pd.z[k]) / (2.0 * h);
                    assert!((d.re - jac[2 * k][a]).abs() < 1e-6);
                    assert!((d.im - jac[2 * k + 1][a]).abs() < 1e-6);
                }
            }
        }
    }
}

/// Squared moduli of the gauge entries for the charts whose formulas are
/// written out by hand, indexed by zero-based entry.
fn hand_chart(nu: usize, q1: f64, q2: f64) -> Vec<(usize, f64)> {
    match nu {
        1 => vec![
            (2, 2.0 - q1 + q2),
            (3, 6.0 - 2.0 * q1 + q2),
            (4, 6.0 - q1),
            (5, 8.0 - q2),
            (6, 4.0 + q1 - q2),
            (7, 2.0 + 2.0 * q1 - q2),
        ],
        2 => vec![
            (0, 2.0 + q1 - q2),
            (3, 2.0 - q1 + 2.0 * q2),
            (4, 4.0 - q1 + q2),
            (5, 8.0 - q1),
            (6, 6.0 - q2),
            (7, 6.0 + q1 - 2.0 * q2),
        ],
        5 => vec![
            (0, 6.0 - q1),
            (1, 8.0 - q2),
            (2, 4.0 + q1 - q2),
            (3, 2.0 + 2.0 * q1 - q2),
            (6, 2.0 - q1 + q2),
            (7, 6.0 - 2.0 * q1 + q2),
        ],
        7 => vec![
            (0, 2.0 - q1 + q2),
            (1, 6.0 - 2.0 * q1 + q2),
            (2, 6.0 - q1),
            (3, 8.0 - q2),
            (4, 4.0 + q1 - q2),
            (5, 2.0 + 2.0 * q1 - q2),
        ],
        _ => unreachable!(),
    }
}

#[test]
fn charts_agree_with_hand_written_radicands() {
    let mut r = rng(3);
    for nu in [1, 2, 5, 7] {
        for _ in 0..100 {
            let cp = random_interior_chart_point(nu, &mut r, 1e-3);
            let (q1, q2) = cp.free_squares();
            let p = from_chart(&cp).unwrap();
            for (k, sq) in hand_chart(nu, q1, q2) {
                assert!(
                    (p.z[k].re - sq.sqrt()).abs() < 1e-12,
                    "chart {nu}, entry {}",
                    k + 1
                );
                assert_eq!(p.z[k].im, 0.0);
            }
        }
    }
}

#[test]
fn fixed_points_sit_at_chart_origins() {
    let origin = |nu| {
        from_chart(&ChartPoint {
            nu,
            coords: [0.0; 4],
        })
        .unwrap()
    };
    let s = static_fixed_points();
    assert!(origin(7).max_abs_diff(&s[0].1) < 1e-14);
    assert!(origin(2).max_abs_diff(&s[1].1) < 1e-14);
    let (s2, s6) = (SQRT_2, 6f64.sqrt());
    let pmin = AmbientPoint::from_real([0.0, 0.0, s2, s6, s6, 2.0 * s2, 2.0, s2]);
    assert!(origin(1).max_abs_diff(&pmin) < 1e-14);
    assert_eq!(vanishing_pattern(&s[1].1).unwrap(), vec![2, 3]);
    assert_eq!(to_chart(&s[0].1, 7).unwrap().coords, [0.0; 4]);
    // Chart 5 with z6 = sqrt 2 lands on the fixed point with z4 = z5 = 0.
    let q = from_chart(&ChartPoint {
        nu: 5,
        coords: [0.0, 0.0, s2, 0.0],
    })
    .unwrap();
    assert_eq!(vanishing_pattern(&q).unwrap(), vec![4, 5]);
    let qmin = AmbientPoint::from_real([s6, s6, s2, 0.0, 0.0, s2, 2.0, 2.0 * s2]);
    assert!(q.max_abs_diff(&qmin) < 1e-14);
}

#[test]
fn gradients_vanish_at_all_fixed_points() {
    let ts: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let rows = fixed_points_along(DEFAULT_GAMMA, &ts).unwrap();
    for (t, recs) in ts.iter().zip(rows) {
        let params = Params::new(*t, DEFAULT_GAMMA).unwrap();
        for rec in recs {
            let nu = best_chart(&rec.ambient).unwrap();
            let cp = to_chart(&rec.ambient, nu).unwrap();
            let gj = fd_gradient(
                |x| j_in_chart(&ChartPoint { nu, coords: *x }),
                &cp.coords,
                1e-6,
            )
            .unwrap();
            let gh = fd_gradient(
                |x| ht_in_chart(&ChartPoint { nu, coords: *x }, &params),
                &cp.coords,
                1e-6,
            )
            .unwrap();
            let n = gj
                .iter()
                .chain(gh.iter())
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            assert!(n < 1e-6, "{} at t={t}: |dF| = {n:.2e}", rec.label);
        }
    }
}

fn hessian_at_a(t: f64, gamma: f64) -> Mat4 {
    let k = 24.0 * t * gamma;
    let d = 2.0 * t - 1.0;
    [
        [d, 0.0, k, 0.0],
        [0.0, d, 0.0, -k],
        [k, 0.0, 0.0, 0.0],
        [0.0, -k, 0.0, 0.0],
    ]
}

#[test]
fn hessian_at_a_matches_closed_form_and_spectrum() {
    let mut r = rng(4);
    for _ in 0..50 {
        let params = Params::new(r.gen_range(0.0..1.0), r.gen_range(1e-3..1.0 / 48.0)).unwrap();
        let (t, c) = (params.t, 24.0 * params.gamma);
        let cp = ChartPoint {
            nu: 7,
            coords: [0.0; 4],
        };
        let h = hessian_ht_chart(&cp, &params).unwrap();
        let want = hessian_at_a(t, params.gamma);
        for i in 0..4 {
            for j in 0..4 {
                assert!((h[i][j] - want[i][j]).abs() < 1e-12);
            }
        }
        // Eigenvalues xi satisfy xi^4 + (1 - 4t + 2(2 - c^2) t^2) xi^2 + c^4 t^4 = 0.
        let m = mat_mul(&omega_st_inv(), &h);
        let p2 = 1.0 - 4.0 * t + 2.0 * (2.0 - c * c) * t * t;
        let q = (c * t).powi(4);
        for xi in eig4_general(&m).unwrap().0 {
            let x2 = xi * xi;
            assert!((x2 * x2 + p2 * x2 + q).norm() < 1e-10);
        }
    }
}

#[test]
fn combination_at_half_has_unit_focus_spectrum() {
    let params = Params::new(0.5, DEFAULT_GAMMA).unwrap();
    let cp = ChartPoint {
        nu: 7,
        coords: [0.0; 4],
    };
    let dj = j_jet(&cp).unwrap().hess;
    let dh = ht_jet(&cp, &params).unwrap().hess;
    let s = mat_add(&dj, &dh, -1.0 / (12.0 * DEFAULT_GAMMA));
    let eig = eig4_general(&mat_mul(&omega_st_inv(), &s)).unwrap();
    for z in eig.0 {
        assert!(
            (z.re.abs() - 1.0).abs() < 1e-10 && (z.im.abs() - 1.0).abs() < 1e-10,
            "{z}"
        );
    }
    let cls = classify_rank_zero(&cp, &params).unwrap();
    assert_eq!(cls.stype, SingularityType::FocusFocus);
    assert!(cls.combination.is_some());
}

#[test]
fn branch_entries_match_chart_hessian() {
    let ts: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    for &t in &ts {
        let params = Params::new(t, DEFAULT_GAMMA).unwrap();
        for (branch, nu, family) in [
            (Branch::UMinus, 1, Family::U),
            (Branch::UPlus, 1, Family::U),
            (Branch::VMinus, 5, Family::V),
            (Branch::VPlus, 5, Family::V),
        ] {
            let u = solve_branch(branch, &params).unwrap();
            let (a, b, c) = branch_hessian_entries(u, &params, family).unwrap();
            let h = hessian_ht_chart(
                &ChartPoint {
                    nu,
                    coords: [0.0, 0.0, u, 0.0],
                },
                &params,
            )
            .unwrap();
            let diag = [a, a, b, c];
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { diag[i] } else { 0.0 };
                    assert!(
                        (h[i][j] - want).abs() < 1e-9,
                        "{branch:?} t={t} entry ({i},{j})"
                    );
                }
            }
            // On the branch the b entry reduces to gamma t P(u) / (u f^{3/2}).
            if u.abs() > 1e-3 {
                let m = f_poly(u * u);
                let via_p = params.gamma * t * p_poly(u) / (u * m * m.sqrt());
                assert!(
                    (b - via_p).abs() < 1e-9 * (1.0 + b.abs()),
                    "{branch:?} t={t}"
                );
            }
        }
    }
}

#[test]
fn p_is_assembled_from_f_and_g() {
    for i in 0..=40 {
        let u = -SQRT_2 + 2.0 * SQRT_2 * i as f64 / 40.0;
        let w = u * u;
        let m = f_poly(w);
        let dm_du = 2.0 * u * f_poly_deriv(w);
        let want = -m * m - u * m * dm_du / 2.0 - 2.0 * w * g_poly(w);
        assert!((p_poly(u) - want).abs() < 1e-9 * (1.0 + want.abs()));
    }
}

#[test]
fn reduced_height_matches_ambient() {
    let mut r = rng(5);
    for _ in 0..500 {
        let params = Params::new(r.gen_range(0.0..1.0), r.gen_range(1e-3..1.0 / 48.0)).unwrap();
        let j: f64 = r.gen_range(0.0..3.0);
        let (lo, hi) = semitoric_core::manifold::admissible_rho_range(j).unwrap();
        let rc = ReducedCoords {
            j,
            rho: r.gen_range(lo..=hi),
            theta: r.gen_range(0.0..TAU),
        };
        let p = from_reduced(&rc).unwrap();
        let want = ht_value(&p, &params);
        assert!((reduced_height(&rc, &params).unwrap() - want).abs() < 1e-10);
    }
}

#[test]
fn profile_is_modulus_of_z() {
    let mut r = rng(6);
    for _ in 0..500 {
        let nu = r.gen_range(1..=8);
        let p = from_chart(&random_interior_chart_point(nu, &mut r, 1e-3)).unwrap();
        let j = p.z[0].norm_sqr() / 2.0;
        let h = p.z[2].norm_sqr() / 2.0;
        let want = z_function(&p).norm();
        assert!((profile_x(j, h).unwrap() - want).abs() < 1e-8 * (1.0 + want));
    }
}

#[test]
fn z_is_real_on_chart_one_axis() {
    for i in 0..=20 {
        let x2 = SQRT_2 * (-1.0 + 2.0 * i as f64 / 20.0);
        let p = from_chart(&ChartPoint {
            nu: 1,
            coords: [0.0, 0.0, x2, 0.0],
        })
        .unwrap();
        let prod: f64 = [1, 2, 3, 5, 6, 7].iter().map(|&k| p.z[k].re).product();
        let z = z_function(&p);
        assert!((z.re - prod).abs() < 1e-12 && z.im.abs() < 1e-12);
        assert_eq!(x_function(&p), z.re);
    }
}

#[test]
fn fixed_point_images_are_octagon_vertices() {
    let params = Params::new(0.0, DEFAULT_GAMMA).unwrap();
    let oct = octagon();
    for rec in fixed_points(&params).unwrap() {
        let f = semitoric_core::momentum::momentum_map(&rec.ambient, &params);
        let hit = oct
            .vertices_f64()
            .iter()
            .any(|v| (v[0] - f[0]).abs() < 1e-12 && (v[1] - f[1]).abs() < 1e-12);
        assert!(hit, "{} maps to {f:?}", rec.label);
    }
}

#[test]
fn sampler_points_have_pinched_moduli() {
    let params = Params::new(0.5, DEFAULT_GAMMA).unwrap();
    let fib = fibre_sampler_numeric([1.0, 0.0], &params, 256, 7).unwrap();
    assert!(fib.samples.len() > 100);
    for s in &fib.samples {
        let m = s.point.sq();
        let r2 = m[7];
        let want = [2.0, 6.0 - r2, 6.0 - r2, 8.0 - r2, 4.0, 2.0 + r2, r2, r2];
        for k in 0..8 {
            assert!((m[k] - want[k]).abs() < 1e-9, "entry {} of {:?}", k + 1, m);
        }
    }
}

#[test]
fn sampler_is_deterministic_and_empty_off_image() {
    let params = Params::new(0.3, DEFAULT_GAMMA).unwrap();
    let a = fibre_sampler_numeric([1.5, 1.2], &params, 64, 11).unwrap();
    let b = fibre_sampler_numeric([1.5, 1.2], &params, 64, 11).unwrap();
    assert_eq!(a, b);
    assert!(!a.samples.is_empty());
    match fibre_sampler_numeric([10.0, 10.0], &params, 64, 0) {
        Ok(f) => assert!(f.samples.is_empty() && f.diagnostic.is_some()),
        Err(_) => {}
    }
}

#[test]
fn perturbed_samples_are_rejected() {
    let params = Params::new(0.5, DEFAULT_GAMMA).unwrap();
    let mut samples = Vec::new();
    for i in 1..8 {
        let mut p = pinched_fibre_point(i as f64 * 0.3, 0.4 * i as f64, Sheet::Plus).unwrap();
        p.z[2] *= 1.0 + 1e-3;
        samples.push(p);
    }
    let rep = verify_fibre_samples([1.0, 0.0], &params, &samples, 1e-12).unwrap();
    assert!(!rep.passed());
}

#[test]
fn mesh_has_expected_size_and_lies_on_fibre() {
    let params = Params::new(0.5, DEFAULT_GAMMA).unwrap();
    for value in [[1.0, 0.0], [2.0, 0.0]] {
        let mesh = fibre_mesh(value, &params, 6, 9).unwrap();
        assert_eq!(mesh.vertices.len() + mesh.pinch_points.len(), 2 * 6 * 9 + 2);
        for v in &mesh.vertices {
            let f = semitoric_core::momentum::momentum_map(&v.ambient, &params);
            assert!((f[0] - value[0]).abs() < 1e-12 && f[1].abs() < 1e-12);
        }
    }
    assert!(fibre_mesh([1.0, 0.0], &Params::new(0.4, DEFAULT_GAMMA).unwrap(), 4, 4).is_err());
}

#[test]
fn corner_point_is_elliptic_regular_for_positive_t() {
    let s6 = 6f64.sqrt();
    let corner = AmbientPoint::from_real([0.0, SQRT_2, 2.0, 2.0 * SQRT_2, s6, s6, SQRT_2, 0.0]);
    assert!(corner.max_residual() < 1e-14);
    let params0 = Params::new(0.0, DEFAULT_GAMMA).unwrap();
    let pmax = fixed_points(&params0)
        .unwrap()
        .into_iter()
        .find(|r| r.label == FixedPointLabel::Pmax)
        .unwrap();
    assert!(pmax.ambient.max_abs_diff(&corner) < 1e-12);
    for t in [0.2, 0.5, 0.9] {
        let params = Params::new(t, DEFAULT_GAMMA).unwrap();
        let c = classify_rank_one_extremal(&corner, &params).unwrap();
        assert_eq!(c.stype, SingularityType::EllipticRegular);
    }
}

#[test]
fn moving_points_follow_chart_one_axis() {
    let params = Params::new(0.3, DEFAULT_GAMMA).unwrap();
    let u = solve_branch(Branch::UPlus, &params).unwrap();
    let p = p_point(u).unwrap();
    let rec = fixed_points(&params)
        .unwrap()
        .into_iter()
        .find(|r| r.label == FixedPointLabel::Pmax || r.label == FixedPointLabel::Pmin)
        .unwrap();
    assert!(rec.ambient.max_residual() < 1e-12);
    assert_eq!(vanishing_pattern(&p).unwrap(), vec![1]);
    let (tm, tp) = transition_times(DEFAULT_GAMMA);
    assert!(0.0 < tm && tm < 0.5 && 0.5 < tp && tp < 1.0);
}

#[test]
fn octagon_is_delzant_and_a_skewed_triangle_is_not() {
    let rep = verify_delzant(&octagon());
    assert!(rep.is_delzant);
    assert!(rep.vertex_determinants.iter().all(|d| d.abs() == 1));
    let tri = DelzantPolygon::from_integer_vertices(&[[0, 0], [2, 0], [0, 1]]);
    assert!(!verify_delzant(&tri).is_delzant);
    let oct = octagon();
    assert!(oct.contains([1.5, 1.5]));
    assert!(!oct.contains([0.2, 0.2]));
}
