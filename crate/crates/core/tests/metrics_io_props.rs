use covswe::mesh::{build_voronoi, Bounds, Mesh1D};
use covswe::metrics_io::{
    format_convergence_csv, format_csv_1d, format_csv_2d, format_vtk_2d, l2_error_values, write_csv_1d,
    ErrorReport, CSV_1D_HEADER, CSV_2D_HEADER,
};
use covswe::{MetricSpec, State};
use proptest::prelude::*;

fn volumes_and_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(1e-3..1.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn l2_error_is_a_weighted_norm((vol, a, b) in volumes_and_values(), s in -5.0..5.0f64) {
        let zero = vec![0.0; a.len()];
        let na = l2_error_values(&vol, &a, &zero);
        let nb = l2_error_values(&vol, &b, &zero);
        let scaled: Vec<f64> = a.iter().map(|v| s * v).collect();
        prop_assert!((l2_error_values(&vol, &scaled, &zero) - s.abs() * na).abs() <= 1e-12 * (1.0 + na));
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(l2_error_values(&vol, &sum, &zero) <= na + nb + 1e-12);
        // the error of a against b is the norm of their difference
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assert_eq!(l2_error_values(&vol, &a, &b), l2_error_values(&vol, &diff, &zero));
        prop_assert_eq!(l2_error_values(&vol, &a, &a), 0.0);
    }

    #[test]
    fn csv_1d_round_trips(h in prop::collection::vec(0.1..5.0f64, 3..30), b in -1.0..1.0f64) {
        let mesh = Mesh1D::build(-1.0, 1.0, h.len()).unwrap();
        let states: Vec<State> = h.iter().map(|&h| State::new(h, 0.5 * h, 0.0, b, 1.0, 0.0, 1.0)).collect();
        let text = format_csv_1d(&mesh, &states, 0);
        prop_assert_eq!(text.clone(), format_csv_1d(&mesh, &states, 0));
        let mut lines = text.lines();
        prop_assert_eq!(lines.next().unwrap(), CSV_1D_HEADER);
        for (k, line) in lines.enumerate() {
            let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            prop_assert_eq!(f.len(), 8);
            prop_assert_eq!(f[0], mesh.center(k));
            prop_assert_eq!(f[1], states[k].h());
            prop_assert_eq!(f[2], states[k].velocity()[0]);
            prop_assert_eq!(f[4], states[k].eta());
        }
    }
}

#[test]
fn csv_2d_and_vtk_layout() {
    let mesh = build_voronoi(Bounds::square(-1.0, 1.0).unwrap(), 30, 2, 5).unwrap();
    let states: Vec<State> = (0..30).map(|k| State::new(1.0 + k as f64 * 1e3, 0.1, -0.2, 0.3, 1.0, 0.0, 1.0)).collect();
    let csv = format_csv_2d(&mesh, &states);
    assert_eq!(csv.lines().next().unwrap(), CSV_2D_HEADER);
    assert_eq!(csv.lines().count(), 31);
    // no locale grouping: every field parses with the plain float grammar
    for line in csv.lines().skip(1) {
        assert!(line.split(',').all(|v| v.parse::<f64>().is_ok()));
    }
    let vtk = format_vtk_2d(&mesh, &states, &MetricSpec::spherical(1.0).unwrap(), "bump\nt=0");
    let lines: Vec<&str> = vtk.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[1], "bumpt=0");
    assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
    assert_eq!(lines[4], format!("POINTS {} double", mesh.vertices.len()));
    // embedded points lie on the unit sphere
    for l in &lines[5..5 + mesh.vertices.len()] {
        let p: Vec<f64> = l.split(' ').map(|v| v.parse().unwrap()).collect();
        assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-14);
    }
    assert!(vtk.contains("CELL_TYPES 30"));
    assert!(vtk.contains("CELL_DATA 30"));
    for name in ["h", "u1", "u2", "b", "eta"] {
        assert!(vtk.contains(&format!("SCALARS {name} double 1")));
    }
}

#[test]
fn convergence_csv_rows() {
    let reports: Vec<ErrorReport> = [(2e-2, 1.6e-5), (1e-2, 4e-6), (5e-3, 1e-6)]
        .iter()
        .map(|&(dx, e)| ErrorReport { h: e, u: [2.0 * e, 0.0], mesh_size: dx, time: 1.0, cells: (1.0 / dx) as usize })
        .collect();
    let csv = format_convergence_csv(&reports, 0).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1].split(',').nth(3), Some(""));
    for row in &lines[2..] {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[3], "2.0000");
        assert_eq!(f[5], "2.0000");
    }
    let zero = [reports[0], ErrorReport { h: 0.0, ..reports[1] }];
    assert!(format_convergence_csv(&zero, 0).is_err());
}

#[test]
fn writers_create_parent_directories() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a/b/profile.csv");
    let mesh = Mesh1D::build(0.0, 1.0, 4).unwrap();
    let states = vec![State::at_rest(2.0, 0.5, [1.0, 0.0, 1.0]); 4];
    write_csv_1d(&path, &mesh, &states, 0).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 5);
}
