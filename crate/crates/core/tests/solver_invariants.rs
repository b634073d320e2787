use std::sync::Arc;

use covswe::mesh::{build_quad_grid_periodic, build_voronoi};
use covswe::scenarios::{scenario, BoundaryRule, Scenario, DEFAULT_NOISE};
use covswe::solver::{Limiter, Scheme, SchemeConfig, SimulationState, Solver1d, Solver2d, TimeStepper};
use covswe::state::NVAR;
use covswe::{Error, MetricSpec, State};

const METRICS: [&str; 3] = ["cartesian", "spherical", "elliptical"];

/// Rest over a bump, a step and a noised step for one metric family.
fn rest_cases(metric: &str) -> Vec<Scenario> {
    let bump = scenario("wr_bump_1d")
        .unwrap()
        .with_metric(MetricSpec::by_name(metric).unwrap())
        .unwrap();
    let mut step = bump.clone();
    step.bathymetry = Arc::new(|x: [f64; 2]| if x[0] + x[1] < 0.0 { 0.2 } else { 1.1 });
    step.bathymetry_gradient = None;
    let noised = step.clone().with_noise(Some(DEFAULT_NOISE));
    vec![bump, step, noised]
}

fn l2_change(a: &[State], b: &[State], volume: f64) -> [f64; NVAR] {
    let mut out = [0.0; NVAR];
    for (p, q) in a.iter().zip(b) {
        for c in 0..NVAR {
            out[c] += volume * (p[c] - q[c]).powi(2);
        }
    }
    out.map(f64::sqrt)
}

fn steps<S: TimeStepper>(solver: &mut S, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let dt = solver.timestep().unwrap();
            solver.step(dt).unwrap();
            dt
        })
        .collect()
}

#[test]
fn rest_is_preserved_for_ten_thousand_steps() {
    for metric in METRICS {
        for s in rest_cases(metric) {
            let mesh = s.mesh_1d(60).unwrap();
            let mut solver = Solver1d::new(mesh, s.clone(), SchemeConfig::new(Scheme::WbRest, 1e9, 1)).unwrap();
            let q0 = solver.state().averages.clone();
            let dts = steps(&mut solver, 10_000);
            let change = l2_change(&q0, &solver.state().averages, mesh.dx);
            assert!(change.iter().all(|c| *c <= 1e-12), "{metric} {:?}: {change:?}", s.noise);
            // with nothing moving the CFL step never changes
            assert!(dts.iter().all(|dt| *dt == dts[0]));
        }
    }
}

#[test]
fn rest_is_preserved_on_voronoi_meshes() {
    for metric in METRICS {
        let s = scenario("wr_bump_2d")
            .unwrap()
            .with_metric(MetricSpec::by_name(metric).unwrap())
            .unwrap();
        let mesh = build_voronoi(s.bounds().unwrap(), 300, 5, 3).unwrap();
        let mut solver = Solver2d::new(mesh, s, SchemeConfig::new(Scheme::WbRest, 1e9, 2)).unwrap();
        let q0 = solver.state().averages.clone();
        let dts = steps(&mut solver, 300);
        let d = q0
            .iter()
            .zip(&solver.state().averages)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-12, "{metric}: {d:e}");
        assert!(dts.iter().all(|dt| *dt == dts[0]));
    }
}

#[test]
fn standard_scheme_moves_a_step_at_rest() {
    let s = scenario("step_1d_cart").unwrap();
    let mesh = s.mesh_1d(100).unwrap();
    let mut std = Solver1d::new(mesh, s.clone(), SchemeConfig::new(Scheme::Standard, 0.05, 1)).unwrap();
    std.run(0, |_| Ok(())).unwrap();
    let dev = std.state().averages.iter().map(|q| (q.eta() - 2.0).abs()).fold(0.0, f64::max);
    assert!(dev > 1e-3);
}

#[test]
fn runs_are_deterministic() {
    let s = scenario("riemann_step_2d_cart").unwrap();
    let mesh = build_voronoi(s.bounds().unwrap(), 250, 4, 11).unwrap();
    let run = || {
        let mut solver = Solver2d::new(mesh.clone(), s.clone(), SchemeConfig::new(Scheme::WbRest, 0.02, 2)).unwrap();
        solver.run(0, |_| Ok(())).unwrap();
        solver.into_state()
    };
    assert_eq!(run(), run());
    let s = scenario("riemann_flat_1d_cart").unwrap();
    let run = || {
        let mut solver = Solver1d::new(s.mesh_1d(100).unwrap(), s.clone(), SchemeConfig::new(Scheme::Standard, 0.05, 1)).unwrap();
        solver.run(0, |_| Ok(())).unwrap();
        solver.into_state()
    };
    assert_eq!(run(), run());
}

#[test]
fn final_step_is_clipped_to_t_end() {
    let s = scenario("riemann_flat_1d_cart").unwrap();
    let mesh = s.mesh_1d(50).unwrap();
    let mut solver = Solver1d::new(mesh, s.clone(), SchemeConfig::new(Scheme::Standard, 1e-7, 1)).unwrap();
    assert!(solver.timestep().unwrap() > 1e-7);
    solver.run(0, |_| Ok(())).unwrap();
    assert_eq!(solver.state().step, 1);
    assert_eq!(solver.state().t, 1e-7);

    let mut solver = Solver1d::new(mesh, s, SchemeConfig::new(Scheme::Standard, 0.013, 1)).unwrap();
    let mut seen: Vec<(usize, f64)> = Vec::new();
    solver
        .run(3, |st: &SimulationState| {
            seen.push((st.step, st.t));
            Ok(())
        })
        .unwrap();
    let last = solver.state().step;
    assert_eq!(seen.first().unwrap().0, 0);
    assert_eq!(*seen.last().unwrap(), (last, 0.013));
    assert!(seen[1..seen.len() - 1].iter().all(|(s, _)| s % 3 == 0));
    assert!(seen.windows(2).all(|w| w[0].1 < w[1].1));
}

#[test]
fn moving_equilibrium_is_an_exact_fixed_point() {
    let s = scenario("steady_conv_1d").unwrap();
    let eq = s.equilibrium().unwrap();
    let mesh = s.mesh_1d(80).unwrap();
    let init: Vec<State> = mesh.centers().into_iter().map(|xi| eq.state(s.point(xi)).unwrap()).collect();
    let cfg = SchemeConfig::new(Scheme::WbGeneral, 0.2, 1).with_equilibrium(eq);
    let mut solver = Solver1d::with_initial(mesh, s, cfg, init.clone()).unwrap();
    solver.run(0, |_| Ok(())).unwrap();
    let d = init
        .iter()
        .zip(&solver.state().averages)
        .map(|(a, b)| (*a - *b).max_abs())
        .fold(0.0, f64::max);
    assert!(d <= 1e-12, "{d:e}");
}

#[test]
fn periodic_mass_is_conserved() {
    let mut s = scenario("wr_bump_1d").unwrap().with_boundary(BoundaryRule::Periodic);
    s.initial_eta = Arc::new(|x: [f64; 2]| 3.0 + 0.3 * (-30.0 * x[0] * x[0]).exp());
    s.initial_velocity = Arc::new(|_| [0.4, 0.0]);
    let mesh = s.mesh_1d(80).unwrap();
    for scheme in [Scheme::Standard, Scheme::WbRest] {
        let mut solver = Solver1d::new(mesh, s.clone(), SchemeConfig::new(scheme, 1e9, 1)).unwrap();
        let mass = |a: &[State]| a.iter().map(|q| q.h()).sum::<f64>() * mesh.dx;
        let m0 = mass(&solver.state().averages);
        steps(&mut solver, 1000);
        let rel = (mass(&solver.state().averages) - m0).abs() / m0;
        assert!(rel <= 1e-12, "{scheme}: {rel:e}");
    }

    let mut s2 = scenario("wr_bump_2d").unwrap().with_boundary(BoundaryRule::Periodic);
    s2.initial_eta = Arc::new(|x: [f64; 2]| 3.0 + 0.2 * (-10.0 * (x[0] * x[0] + x[1] * x[1])).exp());
    let mesh = build_quad_grid_periodic(s2.bounds().unwrap(), 12, 12, [true, true]).unwrap();
    let mut solver = Solver2d::new(mesh.clone(), s2, SchemeConfig::new(Scheme::Standard, 1e9, 2)).unwrap();
    let mass = |a: &[State]| a.iter().zip(&mesh.cells).map(|(q, c)| q.h() * c.area).sum::<f64>();
    let m0 = mass(&solver.state().averages);
    steps(&mut solver, 200);
    assert!((mass(&solver.state().averages) - m0).abs() / m0 <= 1e-12);
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = scenario("wr_bump_1d").unwrap();
    let mesh = s.mesh_1d(20).unwrap();
    let bad = [
        SchemeConfig::new(Scheme::WbRest, 1.0, 1).with_cfl(1.0),
        SchemeConfig::new(Scheme::WbRest, 1.0, 1).with_cfl(0.0),
        SchemeConfig::new(Scheme::WbRest, -1.0, 1),
        SchemeConfig::new(Scheme::WbGeneral, 1.0, 1),
    ];
    for cfg in bad {
        assert!(matches!(Solver1d::new(mesh, s.clone(), cfg), Err(Error::InvalidConfig(_))));
    }
    let s2 = scenario("wr_bump_2d").unwrap();
    let mesh2 = covswe::mesh::build_quad_grid(s2.bounds().unwrap(), 8, 8).unwrap();
    let cfg = SchemeConfig::new(Scheme::WbRest, 1.0, 2).with_limiter(Limiter::Minmod);
    assert!(matches!(Solver2d::new(mesh2.clone(), s2.clone(), cfg), Err(Error::InvalidConfig(_))));
    // a periodic rule needs a mesh without ghosts
    let cfg = SchemeConfig::new(Scheme::WbRest, 1.0, 2);
    let periodic = s2.with_boundary(BoundaryRule::Periodic);
    assert!(matches!(Solver2d::new(mesh2, periodic, cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn depth_loss_is_reported_with_cell_and_time() {
    let mut s = scenario("riemann_flat_1d_cart").unwrap();
    // colliding jets that drain the middle cells
    s.initial_velocity = Arc::new(|x: [f64; 2]| [if x[0] < 0.0 { -30.0 } else { 30.0 }, 0.0]);
    s.initial_eta = Arc::new(|_| 0.05);
    let mesh = s.mesh_1d(50).unwrap();
    let mut solver = Solver1d::new(mesh, s, SchemeConfig::new(Scheme::Standard, 1.0, 1)).unwrap();
    match solver.run(0, |_| Ok(())) {
        Err(Error::AtCell { source, .. }) => assert!(matches!(*source, Error::NonPositiveDepth { .. })),
        other => panic!("expected a depth failure, got {other:?}"),
    }
}
