use std::sync::Arc;

use covswe::mesh::build_quad_grid;
use covswe::scenarios::{apply_noise, catalog, classical_swe_step_1d, scenario, ClassicalState, ExactSolution};
use covswe::solver::{Scheme, SchemeConfig, Solver1d, TimeStepper};
use covswe::GRAVITY;
use proptest::prelude::*;

#[test]
fn every_scenario_starts_with_positive_depth() {
    for s in catalog() {
        let states = if s.dimension() == 1 {
            s.initial_1d(&s.mesh_1d(s.default_cells).unwrap()).unwrap()
        } else {
            let mesh = build_quad_grid(s.bounds().unwrap(), s.default_cells, s.default_cells).unwrap();
            s.initial_2d(&mesh).unwrap()
        };
        assert!(states.iter().all(|q| q.h() > 0.0 && q.is_finite()), "{}", s.name);
    }
}

#[test]
fn steady_flow_solves_the_stationary_ode() {
    let s = scenario("steady_conv_1d").unwrap();
    let Some(ExactSolution::Steady { depth, velocity }) = &s.exact else {
        panic!("steady scenario without exact solution")
    };
    let db = s.bathymetry_gradient.as_ref().unwrap();
    for i in 0..1000 {
        let x = -1.0 + i as f64 / 999.0;
        let p = [x, 0.0];
        let h = depth(p);
        let u = velocity(p)[0];
        // h = e^{-x}, so ∂ₓh = −h
        let dh = -h;
        let lhs = db(p)[0];
        let rhs = (u * u / (GRAVITY * h) - 1.0) * dh;
        assert!((lhs - rhs).abs() <= 1e-12, "x = {x}: {lhs} vs {rhs}");
        // the discharge is constant and the analytic gradient matches b
        assert!((h * u - 1.0).abs() <= 1e-15);
        let eps = 1e-5;
        let fd = ((s.bathymetry)([x + eps, 0.0]) - (s.bathymetry)([x - eps, 0.0])) / (2.0 * eps);
        assert!((fd - lhs).abs() <= 1e-8);
    }
}

#[test]
fn noise_is_seeded_and_bounded() {
    let base = vec![1.0; 500];
    let a = apply_noise(&base, 0.1, 42).unwrap();
    assert_eq!(a, apply_noise(&base, 0.1, 42).unwrap());
    assert_ne!(a, apply_noise(&base, 0.1, 43).unwrap());
    assert!(a.iter().all(|v| (v - 1.0).abs() <= 0.05));
    assert!(a.iter().any(|v| (v - 1.0).abs() > 0.04));
    assert_eq!(apply_noise(&base, 0.0, 1).unwrap(), base);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cartesian_solver_coincides_with_classical_system(
        hl in 1.0..3.0f64,
        hr in 1.0..3.0f64,
        ul in -1.0..1.0f64,
        ur in -1.0..1.0f64,
        x0 in -0.5..0.5f64,
    ) {
        let mut s = scenario("riemann_flat_1d_cart").unwrap();
        s.initial_eta = Arc::new(move |x: [f64; 2]| if x[0] < x0 { hl } else { hr });
        s.initial_velocity = Arc::new(move |x: [f64; 2]| [if x[0] < x0 { ul } else { ur }, 0.0]);
        let mesh = s.mesh_1d(100).unwrap();
        let mut solver = Solver1d::new(mesh, s, SchemeConfig::new(Scheme::Standard, 0.05, 1)).unwrap();
        let mut oracle: Vec<ClassicalState> = solver.state().averages.iter().map(|q| [q.h(), q.m1()]).collect();
        let flat = vec![0.0; 100];
        while solver.state().t < 0.05 {
            let dt = solver.timestep().unwrap().min(0.05 - solver.state().t);
            oracle = classical_swe_step_1d(&oracle, mesh.dx, dt, &flat).unwrap();
            solver.step(dt).unwrap();
            for (q, o) in solver.state().averages.iter().zip(&oracle) {
                prop_assert!((q.h() - o[0]).abs() <= 1e-13 && (q.m1() - o[1]).abs() <= 1e-13);
                prop_assert_eq!(q.m2(), 0.0);
            }
        }
    }
}
