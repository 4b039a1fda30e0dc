use nalgebra::{DMatrix, DVector};
use rand::Rng;
use singular_control::cone::{ControlCone, ControlSystem};
use singular_control::domain::Domain;
use singular_control::hjb::{
    continuous_pde, AffineField, Coefficients, GridProblem, ProbeFlag, RunningCost, SolveOptions,
};

mod support;

fn box_system() -> ControlSystem {
    ControlSystem::new(
        ControlCone::orthant(4),
        DMatrix::from_row_slice(2, 4, &[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0]),
        vec![1.0, 1.0, 1.0, 1.0],
        1.0,
    )
    .unwrap()
}

fn case_b() -> ControlSystem {
    ControlSystem::new(
        ControlCone::orthant(2),
        DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        vec![2.0, -1.0],
        1.0,
    )
    .unwrap()
}

/// σ with `σσ' = [[a, c], [c, b]]`, `|c| <= min(a, b)`.
fn sigma_2d(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    singular_control::network::psd_sqrt(&DMatrix::from_row_slice(2, 2, &[a, c, c, b]))
}

fn random_coefficients_2d(rng: &mut rand_chacha::ChaCha8Rng) -> Coefficients {
    let a: f64 = rng.random_range(0.0..0.5);
    let b = rng.random_range(0.0..0.5);
    let c = rng.random_range(-1.0..1.0) * a.min(b);
    Coefficients {
        drift: AffineField {
            matrix: vec![
                vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            ],
            offset: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
        },
        sigma: sigma_2d(a, b, c),
        running_cost: RunningCost::MaxAffine(vec![
            (vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], 0.0),
            (vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], 0.2),
        ]),
    }
}

#[test]
fn one_sweep_preserves_order() {
    let mut rng = support::rng(31);
    let square = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    let tri = Domain::polygon_hull(&[[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]]).unwrap();
    let interval = Domain::interval(0.0, 1.0).unwrap();
    let mut violations = 0;
    for trial in 0..50 {
        let gp = match trial % 3 {
            0 => GridProblem::build(&square, 0.125, &random_coefficients_2d(&mut rng), &box_system(), 16).unwrap(),
            1 => GridProblem::build(&tri, 0.1, &random_coefficients_2d(&mut rng), &box_system(), 16).unwrap(),
            _ => {
                let co = Coefficients {
                    drift: AffineField::constant(vec![rng.random_range(-1.0..1.0)]),
                    sigma: DMatrix::from_element(1, 1, rng.random_range(0.0..0.7)),
                    running_cost: RunningCost::Constant(rng.random_range(-1.0..1.0)),
                };
                GridProblem::build(&interval, 0.05, &co, &case_b(), 2).unwrap()
            }
        };
        let phi: Vec<f64> = (0..gp.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let chi: Vec<f64> = phi.iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
        let forward = rng.random_bool(0.5);
        let (mut a, mut b) = (phi.clone(), chi.clone());
        gp.sweep(&mut a, forward);
        gp.sweep(&mut b, forward);
        violations += a.iter().zip(&b).filter(|(x, y)| **x > **y + 1e-12).count();
    }
    assert_eq!(violations, 0);
}

fn quadratic(c: f64, b: [f64; 2], a: [[f64; 2]; 2], x: &[f64]) -> f64 {
    c + b[0] * x[0] + b[1] * x[1] + 0.5 * (a[0][0] * x[0] * x[0] + 2.0 * a[0][1] * x[0] * x[1] + a[1][1] * x[1] * x[1])
}

#[test]
fn pde_operator_is_first_order_consistent() {
    let mut rng = support::rng(32);
    let square = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    for _ in 0..10 {
        let co = random_coefficients_2d(&mut rng);
        let c = rng.random_range(-1.0..1.0);
        let b = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let s = rng.random_range(-1.0..1.0);
        let a = [[rng.random_range(0.5..2.0), s], [s, rng.random_range(-2.0..-0.5)]];
        let x = [0.5, 0.5];
        let grad = DVector::from_vec(vec![b[0] + a[0][0] * x[0] + a[0][1] * x[1], b[1] + a[0][1] * x[0] + a[1][1] * x[1]]);
        let hess = DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]);
        let exact = continuous_pde(&co, 1.0, &x, quadratic(c, b, a, &x), &grad, &hess);
        let errors: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let gp = GridProblem::build(&square, h, &co, &box_system(), 8).unwrap();
                let node = gp.nearest_node(&x);
                assert!(gp.nodes[node].iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12));
                let f: Vec<f64> = gp.nodes.iter().map(|y| quadratic(c, b, a, y)).collect();
                (gp.pde_operator(&f, node) - exact).abs()
            })
            .collect();
        assert!(errors[0] <= 2.0 * 0.1 * 4.0, "{errors:?}");
        for k in 0..2 {
            let ratio = errors[k] / errors[k + 1];
            assert!((1.7..=4.3).contains(&ratio), "{errors:?}");
        }
    }
}

#[test]
fn pde_operator_exact_on_quadratics_without_drift() {
    let square = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    let co = Coefficients {
        sigma: sigma_2d(0.4, 0.3, -0.2),
        ..Coefficients::inert(2)
    };
    let a = [[1.5, 0.7], [0.7, -0.4]];
    let gp = GridProblem::build(&square, 0.1, &co, &box_system(), 8).unwrap();
    let f: Vec<f64> = gp.nodes.iter().map(|y| quadratic(0.3, [0.2, -0.1], a, y)).collect();
    for k in (0..gp.len()).filter(|&k| !gp.boundary[k]) {
        let x = &gp.nodes[k];
        let grad = DVector::from_vec(vec![0.2 + a[0][0] * x[0] + a[0][1] * x[1], -0.1 + a[0][1] * x[0] + a[1][1] * x[1]]);
        let hess = DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]);
        let exact = continuous_pde(&co, 1.0, x, f[k], &grad, &hess);
        assert!((gp.pde_operator(&f, k) - exact).abs() < 1e-10);
    }
}

#[test]
fn gradient_operator_on_linear_functions() {
    let mut rng = support::rng(33);
    let interval = Domain::interval(0.0, 1.0).unwrap();
    let gp1 = GridProblem::build(&interval, 0.05, &Coefficients::inert(1), &case_b(), 2).unwrap();
    let square = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    let n_dirs = 32;
    let sys2 = box_system();
    let gp2 = GridProblem::build(&square, 0.1, &Coefficients::inert(2), &sys2, n_dirs).unwrap();
    for _ in 0..20 {
        let q = rng.random_range(-3.0..3.0);
        let f: Vec<f64> = gp1.nodes.iter().map(|x| q * x[0]).collect();
        let exact = (q + 1.0).max(-q - 2.0);
        for k in (0..gp1.len()).filter(|&k| !gp1.boundary[k]) {
            assert!((gp1.hamiltonian_operator(&f, k) - exact).abs() < 1e-9);
        }
        let q2 = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let f: Vec<f64> = gp2.nodes.iter().map(|x| q2[0] * x[0] + q2[1] * x[1]).collect();
        let sampled = sys2.hamiltonian(&q2, n_dirs).unwrap();
        // exact: sup over unit e of -e·q - |e|_1 = max_e(...) with continuous e
        let exact = (0..100_000)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 100_000.0;
                let e = [t.cos(), t.sin()];
                -e[0] * q2[0] - e[1] * q2[1] - e[0].abs() - e[1].abs()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let slack = 2.0 * (q2[0].hypot(q2[1]) + 2f64.sqrt()) * std::f64::consts::PI / n_dirs as f64;
        for k in (0..gp2.len()).filter(|&k| !gp2.boundary[k]) {
            let hh = gp2.hamiltonian_operator(&f, k);
            assert!((hh - sampled).abs() < 1e-9);
            assert!(hh <= exact + 1e-9 && hh >= exact - slack);
        }
    }
}

#[test]
fn boundary_nodes_only_look_inward() {
    let tri = Domain::polygon_hull(&[[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]]).unwrap();
    let gp = GridProblem::build(&tri, 0.05, &Coefficients::inert(2), &box_system(), 24).unwrap();
    for k in 0..gp.len() {
        for foot in gp.foot_points(k) {
            assert!(tri.contains(&foot, 1e-12));
        }
    }
}

#[test]
fn strict_subsolution_gives_single_fixed_point_in_2d() {
    let square = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    let co = Coefficients {
        drift: AffineField::constant(vec![0.3, -0.2]),
        sigma: sigma_2d(0.1, 0.1, 0.05),
        running_cost: RunningCost::MaxAffine(vec![(vec![1.0, -0.5], 0.0), (vec![-1.0, 0.5], 0.3)]),
    };
    let sys = box_system();
    assert!(sys.check_conditions().unwrap().unique());
    let gp = GridProblem::build(&square, 0.1, &co, &sys, 16).unwrap();
    let opts = SolveOptions { tol: 1e-9, max_iter: Some(20_000) };
    let probe = gp.uniqueness_probe(&[1.0, 5.0], &opts).unwrap();
    assert_eq!(probe.flag, ProbeFlag::Unique, "{:?}", probe.sup_differences);
    for f in &probe.fields {
        assert!(f.converged && f.residual_inf <= 1e-8);
    }
}
