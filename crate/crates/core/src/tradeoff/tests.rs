use super::*;
use crate::bounds::{gm_bound, rld_bound_from_inverse, rld_holevo_bound, sld_bound_from_inverse};
use proptest::prelude::*;

const U1: f64 = 0.25;
const U2: f64 = 0.75;

fn hinv2() -> RealSymMatrix {
    RealSymMatrix::from_diagonal(&[U1, U2])
}

fn gm2(d: usize) -> impl Fn(&CostMatrix) -> Result<f64> {
    move |g| Ok(gm_bound_from_inverse(&hinv2(), g, d)?.value)
}

#[test]
fn parametric_symmetric_point() {
    let det = U1 * U2;
    for d in 2..=6 {
        let p = gm_curve_parametric(U1, U2, det, d, &[0.5]).unwrap()[0];
        let k = (d - 1) as f64;
        assert!((p.nv1 - (U1 + det.sqrt()) / k).abs() < 1e-15);
        assert!((p.nv2 - (U2 + det.sqrt()) / k).abs() < 1e-15);
    }
}

#[test]
fn parametric_rejects_bad_input() {
    assert!(matches!(
        gm_curve_parametric(U1, U2, 0.1, 2, &[0.0, 0.5]),
        Err(Error::BadGrid(_))
    ));
    assert!(matches!(
        gm_curve_parametric(U1, U2, 0.1, 2, &[1.0]),
        Err(Error::BadGrid(_))
    ));
    assert!(matches!(gm_curve_parametric(U1, U2, 0.1, 2, &[]), Err(Error::EmptyGrid)));
    assert!(gm_curve_parametric(-1.0, U2, 0.1, 2, &[0.5]).is_err());
    assert!(gm_curve_parametric(U1, U2, 0.1, 1, &[0.5]).is_err());
}

#[test]
fn qubit_curve_stays_above_corner_and_approaches_it() {
    let ts = open_unit_grid(2000, 0.5);
    let c = gm_curve_parametric(U1, U2, U1 * U2, 2, &ts).unwrap();
    assert!(c.iter().all(|p| p.nv1 > U1 && p.nv2 > U2));
    // Asymptotes: t → 1 pushes NV_1 to u1, t → 0 pushes NV_2 to u2.
    let last = c.last().unwrap();
    let first = c.first().unwrap();
    assert!(last.nv1 - U1 < 0.01 && first.nv2 - U2 < 0.01);
    assert!(is_convex_decreasing(&c, 1e-9));
}

#[test]
fn higher_dimensional_curves_cut_the_corner() {
    let ts = open_unit_grid(4000, 0.5);
    // d = 3 touches the corner (at t = 3/4); larger d pass strictly inside.
    let c3 = gm_curve_parametric(U1, U2, U1 * U2, 3, &[0.75]).unwrap()[0];
    assert!((c3.nv1 - U1).abs() < 1e-15 && (c3.nv2 - U2).abs() < 1e-15);
    for d in 4..=6 {
        let c = gm_curve_parametric(U1, U2, U1 * U2, d, &ts).unwrap();
        assert!(c.iter().any(|p| p.nv1 < U1 && p.nv2 < U2), "d = {d}");
        assert!(is_convex_decreasing(&c, 1e-9));
    }
}

fn max_envelope_gap(n: usize) -> f64 {
    let param = gm_curve_parametric(U1, U2, U1 * U2, 2, &open_unit_grid(n, 0.5)).unwrap();
    let xs: Vec<f64> = param.iter().map(|p| p.nv1).collect();
    let env = envelope_from_lines(gm2(2), &open_unit_grid(n, 0.37), &xs).unwrap();
    param
        .iter()
        .zip(&env)
        .filter(|(p, _)| p.t > 0.05 && p.t < 0.95)
        .map(|(p, e)| (p.nv2 - e.nv2).abs())
        .fold(0.0, f64::max)
}

#[test]
fn envelope_matches_parametric_curve() {
    assert!(max_envelope_gap(200) < 2e-3);
    assert!(max_envelope_gap(2000) < 1e-5);
}

#[test]
fn envelope_of_sld_lines_is_a_corner() {
    let ts = open_unit_grid(400, 0.5);
    let xs: Vec<f64> = (1..50).map(|k| U1 + 0.02 * k as f64).collect();
    let env = envelope_from_lines(|g| Ok(sld_bound_from_inverse(&hinv2(), g)?.value), &ts, &xs).unwrap();
    let t0 = ts[0];
    for p in &env {
        assert!(p.nv2 <= U2 + 1e-15);
        assert!(p.nv2 >= U2 - (p.nv1 - U1) * t0 / (1.0 - t0) - 1e-12);
    }
    let left = envelope_from_lines(|g| Ok(sld_bound_from_inverse(&hinv2(), g)?.value), &ts, &[U1 - 0.01]).unwrap();
    assert!(left[0].nv2 > 1.0);
}

#[test]
fn rld_envelope_asymptotes() {
    // H⁻¹DH⁻¹ = [[0, a], [−a, 0]] with a = 0.3.
    let a = 0.3;
    let d = RMat::from_row_slice(2, 2, &[0.0, a / (U1 * U2), -a / (U1 * U2), 0.0]);
    let f = |g: &CostMatrix| Ok(rld_bound_from_inverse(&hinv2(), &d, g)?.value);
    let ts = open_unit_grid(4000, 0.5);
    let far = envelope_from_lines(f, &ts, &[U1 + 5.0]).unwrap()[0];
    assert!(far.nv2 > U2 && far.nv2 - U2 < 0.01);
    let xs: Vec<f64> = (1..40).map(|k| U1 + 0.05 * k as f64).collect();
    let env = envelope_from_lines(f, &ts, &xs).unwrap();
    assert!(env.iter().all(|p| p.nv2 > U2));
    assert!(is_convex_decreasing(&env, 1e-6));
    // Large NV_2 forces NV_1 towards r₁ = u1.
    let near = envelope_from_lines(f, &ts, &[U1 + 0.01]).unwrap()[0];
    assert!(near.nv2 > 2.0);
}

#[test]
fn envelope_empty_grid() {
    assert!(matches!(envelope_from_lines(gm2(2), &[], &[1.0]), Err(Error::EmptyGrid)));
    assert!(matches!(envelope_from_lines(gm2(2), &[0.5], &[]), Err(Error::EmptyGrid)));
}

#[test]
fn convexity_helper_rejects_bumps() {
    let pts = [(0.0, 3.0), (1.0, 1.0), (2.0, 0.9), (3.0, 0.0)]
        .map(|(x, y)| CurvePoint { t: 0.5, nv1: x, nv2: y });
    assert!(!is_convex_decreasing(&pts, 1e-12));
    let rising = [(0.0, 1.0), (1.0, 2.0)].map(|(x, y)| CurvePoint { t: 0.5, nv1: x, nv2: y });
    assert!(!is_convex_decreasing(&rising, 1e-12));
}

#[test]
fn simplex_grid_shape() {
    let g = SimplexGrid::uniform(10, 1e-6).unwrap();
    assert_eq!(g.len(), 66);
    for p in g.points() {
        assert!(p.iter().all(|x| *x >= 1e-6 - 1e-15));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
    assert!(SimplexGrid::uniform(0, 0.0).is_err());
    assert!(SimplexGrid::from_points(vec![[0.5, 0.6, 0.0]]).is_err());
    assert!(SimplexGrid::from_points(vec![]).is_err());
}

fn aligned_bundle(z0: f64) -> crate::models::QfiBundle {
    qfi_bundle(&qubit_model(z0, &Matrix3::identity()).unwrap()).unwrap()
}

#[test]
fn gm_surface_lies_above_rld_surface() {
    let b = aligned_bundle(0.7);
    let grid = SimplexGrid::uniform(60, 1e-6).unwrap();
    let rld = TabulatedBound::new(|g| Ok(rld_holevo_bound(&b, g)?.value), grid).unwrap();
    let hinv = b.h_inv().unwrap();
    let mut strict = 0;
    for p in SimplexGrid::uniform(12, 0.02).unwrap().points() {
        let nv = optimal_covariance_from_inverse(&hinv, &CostMatrix::from_diagonal(p).unwrap(), 2).unwrap();
        let below = rld.min_nv3(nv[(0, 0)], nv[(1, 1)]).unwrap().nv3;
        assert!(nv[(2, 2)] >= below - 1e-9);
        if nv[(2, 2)] > below + 1e-3 {
            strict += 1;
        }
    }
    assert!(strict > 0);
}

#[test]
fn rld_surface_has_flat_bottom() {
    let z0 = 0.7;
    let b = aligned_bundle(z0);
    // Bound values accept boundary costs, so the grid includes the edges.
    let grid = SimplexGrid::uniform(100, 0.0).unwrap();
    let rld = TabulatedBound::new(|g| Ok(rld_holevo_bound(&b, g)?.value), grid).unwrap();
    let floor = 0.25 * (1.0 - z0 * z0);
    for (x, y) in [(1.0, 1.0), (0.6, 2.0), (3.0, 0.5), (10.0, 10.0)] {
        let v = rld.min_nv3(x, y).unwrap().nv3;
        assert!((v - floor).abs() < 1e-12, "({x}, {y}) -> {v}");
    }
}

#[test]
fn gm_surface_single_parameter_limit() {
    let z0 = 0.7;
    let b = aligned_bundle(z0);
    let grid = SimplexGrid::uniform(200, 0.0).unwrap();
    let v = surface_min_nv3(|g| Ok(gm_bound(&b, g, 2)?.value), 1e6, 1e6, &grid).unwrap();
    assert!((v - 0.25 * (1.0 - z0 * z0)).abs() < 1e-4);
}

#[test]
fn surface_infeasible_below_floor() {
    let b = aligned_bundle(0.7);
    let grid = SimplexGrid::uniform(20, 1e-6).unwrap();
    let r = surface_min_nv3(|g| Ok(gm_bound(&b, g, 2)?.value), 1e9, 1e9, &SimplexGrid::from_points(vec![[0.5, 0.5, 0.0]]).unwrap());
    assert!(matches!(r, Err(Error::Infeasible)));
    assert!(surface_min_nv3(|g| Ok(gm_bound(&b, g, 2)?.value), 1.0, 1.0, &grid).is_ok());
}

fn small_config() -> StateIndepConfig {
    StateIndepConfig {
        euler_step_deg: 30.0,
        n_costs: 5,
        ..StateIndepConfig::default()
    }
}

#[test]
fn state_indep_floors_on_coarse_grid() {
    let (summary, points) = state_indep_sweep(&small_config(), 1, 1).unwrap();
    assert_eq!(summary.n_points, 6 * 13 * 13 * 13 * 5);
    assert_eq!(points.len() as u64, summary.n_points);
    assert!(summary.min_total_sum >= 1.0 - 1e-9);
    assert!(summary.min_pairwise_sum >= 0.25 - 1e-9);
    assert!(summary.max_equality_defect < 1e-9);
    for p in points.iter().step_by(97) {
        let g = CostMatrix::from_diagonal(&p.cost).unwrap();
        let r = euler_rotation_deg(p.euler_deg[0], p.euler_deg[1], p.euler_deg[2]);
        let b = qfi_bundle(&qubit_model(p.z0, &r).unwrap()).unwrap();
        let gm = gm_bound(&b, &g, 2).unwrap().value;
        let cost: f64 = (0..3).map(|i| p.nv[i] * p.cost[i]).sum();
        assert!((cost - gm).abs() < 1e-9 * gm.max(1.0));
    }
}

#[test]
fn state_indep_is_deterministic_across_thread_counts() {
    let cfg = small_config();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| state_indep_sweep(&cfg, 7, 0).unwrap())
    };
    let (s1, p1) = run(1);
    let (s3, p3) = run(3);
    assert_eq!(s1, s3);
    assert_eq!(p1, p3);
    assert_eq!(state_indep_sample(&cfg).unwrap().iter().step_by(7).copied().collect::<Vec<_>>(), p1);
}

#[test]
fn state_indep_config_validation() {
    let mut cfg = small_config();
    cfg.z0_list = vec![1.0];
    assert!(matches!(state_indep_sweep(&cfg, 0, 0), Err(Error::PurityGuard(_))));
    cfg.z0_list = vec![];
    assert!(matches!(state_indep_sweep(&cfg, 0, 0), Err(Error::EmptyGrid)));
    let cfg = StateIndepConfig {
        euler_step_deg: 0.0,
        ..small_config()
    };
    assert!(cfg.angles().is_err());
    assert_eq!(StateIndepConfig::default().angles().unwrap().len(), 121);
}

#[test]
fn fast_diag_matches_general_path() {
    let cfg = small_config();
    for (k, g) in cfg.costs().iter().enumerate() {
        let z0 = [0.5, 0.99, 1.0 - 1e-6][k % 3];
        let r = euler_rotation_deg(17.0 * k as f64, 40.0, 5.0);
        let hinv = qubit_hinv(z0, &r);
        let fast = optimal_diag_fast(&hinv, g);
        let slow = optimal_covariance_from_inverse(&to_sym(&hinv).unwrap(), &CostMatrix::from_diagonal(g).unwrap(), 2).unwrap();
        for i in 0..3 {
            assert!((fast[i] - slow[(i, i)]).abs() < 1e-9 * slow[(i, i)].max(1.0));
        }
    }
}

#[test]
fn two_param_minimum_is_one_quarter() {
    let m = min_two_param_state_indep(401, 5).unwrap();
    assert!((m - 0.25).abs() < 1e-4, "{m}");
    let m2 = min_two_param_state_indep(801, 5).unwrap();
    assert!((m - m2).abs() < 1e-6);
    assert!(min_two_param_state_indep(50, 5).is_err());
}

#[test]
fn two_param_objective_at_identity() {
    for uz in [-1.0, -0.3, 0.0, 0.5, 1.0] {
        assert!((two_param_objective(1.0, uz) - 1.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rodrigues_reduction_matches_direct(u in prop::array::uniform3(-1.0f64..1.0), phi in 0.0f64..std::f64::consts::TAU) {
        let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        prop_assume!(n > 1e-3);
        let axis = [u[0] / n, u[1] / n, u[2] / n];
        let r = rodrigues(&axis, phi);
        prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-12);
        let direct = two_param_cost_direct(&r);
        let reduced = two_param_objective(phi.cos(), axis[2]);
        prop_assert!((direct - reduced).abs() < 1e-9, "direct {} reduced {}", direct, reduced);
        prop_assert!(reduced >= 0.25 - 1e-12);
    }
}

#[test]
fn plane_check() {
    let rots: Vec<_> = (0..20)
        .map(|k| euler_rotation_deg(18.0 * k as f64, 7.0 * k as f64, 33.0 * k as f64))
        .collect();
    let pc = three_param_plane_check(&rots).unwrap();
    assert_eq!(pc.analytic_max_dev, 0.0);
    assert!(pc.numeric_max_dev < 1e-3);
    assert!(pc.min_mixed_excess > 0.0);
    assert!(three_param_plane_check(&[]).is_err());
}

#[test]
fn holevo_identity_minimum() {
    let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let (v, at) = holevo_state_indep(&grid).unwrap();
    assert!((v - 0.75).abs() < 1e-12);
    assert_eq!(at, 0.0);
    assert!((holevo_identity_cost(1.0) - 1.0).abs() < 1e-15);
    assert!(grid.iter().all(|&z| holevo_identity_cost(z) >= 0.75 - 1e-12));
    assert!(holevo_state_indep(&[]).is_err());
}

#[test]
fn holevo_identity_cost_matches_rld_bound() {
    for z0 in [0.0, 0.3, 0.8] {
        let b = aligned_bundle(z0);
        let v = rld_holevo_bound(&b, &CostMatrix::from_diagonal(&[1.0; 3]).unwrap()).unwrap().value;
        assert!((v - holevo_identity_cost(z0)).abs() < 1e-12);
    }
}

#[test]
fn measurement_clouds() {
    let z0 = 0.92;
    let euler = [25.0, 25.0, 55.0];
    let clouds = rotated_pauli_comparison(z0, euler, 200, 200, 11).unwrap();
    let r = euler_rotation_deg(euler[0], euler[1], euler[2]);
    for p in &clouds.pauli {
        let closed = pauli_mixture_nv(z0, &r, &p.cost);
        for i in 0..3 {
            assert!((closed[i] - p.nv[i]).abs() < 1e-9 * closed[i]);
        }
    }
    let b = qfi_bundle(&qubit_model(z0, &r).unwrap()).unwrap();
    let grid = SimplexGrid::uniform(100, 1e-6).unwrap();
    let surf = TabulatedBound::new(|g| Ok(gm_bound(&b, g, 2)?.value), grid).unwrap();
    let excess = |cloud: &[SurfacePoint]| -> Vec<f64> {
        cloud
            .iter()
            .map(|p| p.nv[2] - surf.min_nv3(p.nv[0], p.nv[1]).unwrap().nv3)
            .collect()
    };
    let ep = excess(&clouds.pauli);
    let es = excess(&clouds.sld);
    assert!(ep.iter().all(|e| *e >= -1e-9));
    assert!(es.iter().all(|e| *e >= -1e-9));
    let median = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    assert!(median(&es) > median(&ep));
    for p in &clouds.optimal {
        let g = CostMatrix::from_diagonal(&p.cost).unwrap();
        let cost: f64 = (0..3).map(|i| p.nv[i] * p.cost[i]).sum();
        assert!((cost - gm_bound(&b, &g, 2).unwrap().value).abs() < 1e-9);
    }
}

#[test]
fn pauli_mixture_pure_cost_limit() {
    let z0 = 0.92;
    let r = euler_rotation_deg(25.0, 25.0, 55.0);
    let b = qfi_bundle(&qubit_model(z0, &r).unwrap()).unwrap();
    for i in 0..3 {
        let mut w = [1e-7; 3];
        w[i] = 1.0 - 2e-7;
        let nv = pauli_mixture_nv(z0, &r, &w);
        let target = 0.25 * (1.0 - z0 * z0 * r[(i, 2)] * r[(i, 2)]);
        assert!((nv[i] - target).abs() < 1e-6);
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let gm = gm_bound(&b, &CostMatrix::from_diagonal(&e).unwrap(), 2).unwrap().value;
        assert!((gm - target).abs() < 1e-12);
    }
}
