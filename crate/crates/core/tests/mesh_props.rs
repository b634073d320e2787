use covswe::mesh::{
    build_quad_grid, build_quad_grid_periodic, build_voronoi, parse_mesh, save_mesh, load_mesh, write_mesh, Bounds,
    EdgeRight, Mesh1D, PolyMesh,
};
use covswe::Error;
use proptest::prelude::*;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn check_invariants(mesh: &PolyMesh) {
    let n = mesh.n_cells();
    let area = mesh.bounds.area();
    assert!((mesh.total_area() - area).abs() <= 1e-10 * area, "tiling");
    let mut neighbours = vec![Vec::new(); n];
    for (k, cell) in mesh.cells.iter().enumerate() {
        assert!(cell.area > 0.0);
        assert!(mesh.closure_residual(k) <= 1e-12 * cell.perimeter, "closure of cell {k}");
        let pts: Vec<[f64; 2]> = cell.vertices.iter().map(|&v| mesh.vertices[v]).collect();
        let (a, c) = covswe::mesh::polygon_area_centroid(&pts);
        assert!(a > 0.0, "counterclockwise loop");
        assert!((a - cell.area).abs() <= 1e-13 * a);
        assert!(dist(c, cell.centroid) <= 1e-12 * cell.perimeter);
        for f in &cell.faces {
            let e = &mesh.edges[f.edge];
            if f.neighbor < n {
                neighbours[k].push(f.neighbor);
            }
            // outward normal points away from the centroid
            let out = f.midpoint_offset;
            assert!(f.sign * (out[0] * e.normal[0] + out[1] * e.normal[1]) > 0.0);
        }
    }
    for (i, e) in mesh.edges.iter().enumerate() {
        let [a, b] = e.vertices.map(|v| mesh.vertices[v]);
        assert!((e.length - dist(a, b)).abs() <= 1e-14 * e.length.max(1.0), "edge {i} length");
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        assert!(dist(mid, e.midpoint) <= 1e-14, "edge {i} midpoint");
        assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() <= 1e-14);
        let t = [b[0] - a[0], b[1] - a[1]];
        assert!((t[0] * e.normal[0] + t[1] * e.normal[1]).abs() <= 1e-12 * e.length);
        if let EdgeRight::Cell { cell, .. } = e.right {
            assert_ne!(cell, e.left);
        }
    }
    for k in 0..n {
        for &l in &neighbours[k] {
            assert!(neighbours[l].contains(&k), "stencil symmetry {k} <-> {l}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn voronoi_meshes_satisfy_invariants(n in 4usize..200, iters in 0usize..8, seed in any::<u64>(), w in 0.5..3.0f64, h in 0.5..3.0f64) {
        let bounds = Bounds::new([-w / 2.0, 0.0], [w / 2.0, h]).unwrap();
        let mesh = build_voronoi(bounds, n, iters, seed).unwrap();
        prop_assert_eq!(mesh.n_cells(), n);
        check_invariants(&mesh);
    }

    #[test]
    fn quad_grids_satisfy_invariants(nx in 1usize..20, ny in 1usize..20) {
        let mesh = build_quad_grid(Bounds::new([-1.0, 0.5], [2.0, 1.5]).unwrap(), nx, ny).unwrap();
        prop_assert_eq!(mesh.n_cells(), nx * ny);
        check_invariants(&mesh);
    }

    #[test]
    fn mesh_text_round_trip_is_exact(n in 4usize..80, seed in any::<u64>()) {
        let mesh = build_voronoi(Bounds::square(-1.0, 1.0).unwrap(), n, 2, seed).unwrap();
        let back = parse_mesh(&write_mesh(&mesh)).unwrap();
        prop_assert_eq!(&back.vertices, &mesh.vertices);
        for (a, b) in back.cells.iter().zip(&mesh.cells) {
            prop_assert_eq!(&a.vertices, &b.vertices);
            prop_assert!((a.area - b.area).abs() <= 1e-15 * b.area);
        }
    }
}

#[test]
fn periodic_grid_has_no_ghosts_and_wraps() {
    let mesh = build_quad_grid_periodic(Bounds::square(0.0, 1.0).unwrap(), 4, 5, [true, true]).unwrap();
    assert!(mesh.ghosts.is_empty());
    check_invariants(&mesh);
    for cell in &mesh.cells {
        assert_eq!(cell.faces.len(), 4);
        for f in &cell.faces {
            let d = f.neighbor_offset;
            assert!((d[0].abs() - 0.25).abs() < 1e-14 && d[1] == 0.0 || d[0] == 0.0 && (d[1].abs() - 0.2).abs() < 1e-14);
        }
    }
}

#[test]
fn quad_counts_and_mesh_size() {
    let mesh = build_quad_grid(Bounds::square(0.0, 1.0).unwrap(), 2, 2).unwrap();
    assert_eq!(mesh.edges.len(), 12);
    let interior = mesh.edges.iter().filter(|e| matches!(e.right, EdgeRight::Cell { .. })).count();
    assert_eq!(interior, 4);
    assert!(mesh.cells.iter().all(|c| (c.area - 0.25).abs() < 1e-15));
    let mesh = build_quad_grid(Bounds::square(-1.1, 1.1).unwrap(), 56, 56).unwrap();
    assert!((mesh.mean_incircle_diameter() - 2.2 / 56.0).abs() < 1e-12);
}

#[test]
fn symmetric_seeds_give_congruent_squares() {
    let seeds = vec![[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]];
    let mesh = covswe::mesh::build_voronoi_from_seeds(Bounds::square(0.0, 1.0).unwrap(), seeds, 0).unwrap();
    for c in &mesh.cells {
        assert!((c.area - 0.25).abs() < 1e-14);
        assert!((c.perimeter - 2.0).abs() < 1e-14);
    }
}

#[test]
fn relaxed_voronoi_mesh_size() {
    let mesh = build_voronoi(Bounds::square(-1.1, 1.1).unwrap(), 3100, 50, 42).unwrap();
    let target = 2.2 / 3100f64.sqrt();
    let d = mesh.mean_incircle_diameter();
    assert!((d - target).abs() <= 0.15 * target, "d_N = {d}, target {target}");
    check_invariants(&mesh);
}

#[test]
fn voronoi_is_deterministic() {
    let b = Bounds::square(0.0, 2.0).unwrap();
    assert_eq!(build_voronoi(b, 60, 3, 9).unwrap(), build_voronoi(b, 60, 3, 9).unwrap());
}

#[test]
fn mesh_file_errors_and_disk_round_trip() {
    assert!(matches!(parse_mesh(""), Err(Error::Parse { .. })));
    assert!(matches!(parse_mesh("MESH v9 1 1\n"), Err(Error::Parse { line: 1, .. })));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.mesh");
    let mesh = build_quad_grid(Bounds::square(0.0, 1.0).unwrap(), 3, 3).unwrap();
    save_mesh(&mesh, &path).unwrap();
    let back = load_mesh(&path).unwrap();
    assert_eq!(back.vertices, mesh.vertices);
    assert_eq!(back.n_cells(), 9);
}

#[test]
fn interval_mesh() {
    let m = Mesh1D::build(-0.5, 0.5, 20).unwrap();
    assert!((m.dx - 0.05).abs() < 1e-16);
    assert!((m.center(0) + 0.475).abs() < 1e-15 && (m.center(19) - 0.475).abs() < 1e-15);
    assert!(matches!(Mesh1D::build(0.0, 1.0, 1), Err(Error::InvalidBounds(_))));
    assert!((Mesh1D::build(-1.0, 1.0, 200).unwrap().dx - 1e-2).abs() < 1e-17);
}
