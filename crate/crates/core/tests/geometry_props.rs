use covswe::geometry::{metric_max_eigen, CovariantMetric};
use covswe::MetricSpec;
use proptest::prelude::*;

fn families() -> [MetricSpec; 3] {
    [
        MetricSpec::cartesian(),
        MetricSpec::spherical(1.0).unwrap(),
        MetricSpec::elliptical(1.0, 2.0).unwrap(),
    ]
}

fn spec() -> impl Strategy<Value = MetricSpec> {
    (0usize..3).prop_map(|i| families()[i])
}

/// Chart points away from the poles `φ = ±π/2`.
fn chart_point() -> impl Strategy<Value = [f64; 2]> {
    (-3.0..3.0f64, -1.5..1.5f64).prop_map(|(a, b)| [a, b])
}

/// Symmetric positive definite metrics with off-diagonal coupling.
fn spd_metric() -> impl Strategy<Value = CovariantMetric> {
    (0.1..10.0f64, 0.1..10.0f64, -0.95..0.95f64).prop_map(|(a, c, r)| CovariantMetric::new(a, r * (a * c).sqrt(), c))
}

fn assert_identity(g: &CovariantMetric) -> Result<(), TestCaseError> {
    let c = g.contravariant().unwrap();
    let id = [
        g.g11 * c.g11 + g.g12 * c.g12,
        g.g11 * c.g12 + g.g12 * c.g22,
        g.g12 * c.g11 + g.g22 * c.g12,
        g.g12 * c.g12 + g.g22 * c.g22,
    ];
    let expect = [1.0, 0.0, 0.0, 1.0];
    for (v, e) in id.iter().zip(expect) {
        prop_assert!((v - e).abs() <= 1e-13, "{id:?}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_round_trip_on_families(s in spec(), x in chart_point()) {
        assert_identity(&s.eval_metric(x).unwrap())?;
    }

    #[test]
    fn inverse_round_trip_on_coupled_metrics(g in spd_metric()) {
        assert_identity(&g)?;
    }

    #[test]
    fn families_are_even_in_latitude(s in spec(), x in chart_point()) {
        let a = s.eval_metric(x).unwrap();
        let b = s.eval_metric([x[0], -x[1]]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn determinant_positive_on_chart_interior(s in spec(), x in chart_point()) {
        prop_assert!(s.eval_metric(x).unwrap().det() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_eigen_bounds_sampled_directions(g in spd_metric()) {
        let lam = metric_max_eigen(&g).unwrap();
        let c = g.contravariant().unwrap();
        let mut best = 0.0_f64;
        for i in 0..10_000 {
            let t = std::f64::consts::PI * i as f64 / 10_000.0;
            let q = c.quadratic_form([t.cos(), t.sin()]);
            prop_assert!(q <= lam * (1.0 + 1e-12));
            best = best.max(q);
        }
        prop_assert!((lam - best) / lam <= 1e-6, "closed form {lam}, sampled {best}");
    }
}

#[test]
fn pole_is_rejected() {
    let s = MetricSpec::spherical(1.0).unwrap();
    assert!(s.eval_metric([0.0, std::f64::consts::FRAC_PI_2]).is_err());
}
