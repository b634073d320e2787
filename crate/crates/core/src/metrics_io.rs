//! Discrete error norms, convergence orders and result writers (CSV and
//! legacy ASCII VTK).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::MetricSpec;
use crate::mesh::{Mesh1D, PolyMesh};
use crate::state::State;

/// Per-cell measure and sample point of a mesh.
pub trait CellMeasure {
    type Point: Copy;
    fn n_cells(&self) -> usize;
    fn volume(&self, k: usize) -> f64;
    fn point(&self, k: usize) -> Self::Point;
}

impl CellMeasure for Mesh1D {
    type Point = f64;

    fn n_cells(&self) -> usize {
        self.n_cells
    }

    fn volume(&self, _k: usize) -> f64 {
        self.dx
    }

    fn point(&self, k: usize) -> f64 {
        self.center(k)
    }
}

impl CellMeasure for PolyMesh {
    type Point = [f64; 2];

    fn n_cells(&self) -> usize {
        self.cells.len()
    }

    fn volume(&self, k: usize) -> f64 {
        self.cells[k].area
    }

    fn point(&self, k: usize) -> [f64; 2] {
        self.cells[k].centroid
    }
}

/// Midpoint-rule L2 error `√(Σ_k |Ω_k| (v_k − v_ex(x_k))²)`.
pub fn l2_error<M: CellMeasure>(
    mesh: &M,
    numeric: &[f64],
    exact: impl Fn(M::Point) -> f64,
) -> f64 {
    (0..mesh.n_cells())
        .map(|k| {
            let d = numeric[k] - exact(mesh.point(k));
            mesh.volume(k) * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// [`l2_error`] with precomputed exact values.
pub fn l2_error_values(volumes: &[f64], numeric: &[f64], exact: &[f64]) -> f64 {
    volumes
        .iter()
        .zip(numeric.iter().zip(exact))
        .map(|(v, (a, b))| v * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `log(ε₁/ε₂) / log(r₁/r₂)`.
pub fn convergence_order(e1: f64, r1: f64, e2: f64, r2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && e1.is_finite() && e2.is_finite()) {
        return Err(Error::DegenerateRatio(format!(
            "errors must be positive, got {e1:e} and {e2:e}"
        )));
    }
    if !(r1 > 0.0 && r2 > 0.0) || r1 == r2 {
        return Err(Error::DegenerateRatio(format!(
            "mesh sizes must be positive and distinct, got {r1:e} and {r2:e}"
        )));
    }
    Ok((e1 / e2).ln() / (r1 / r2).ln())
}

/// L2 errors of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    /// Velocity components `u¹`, `u²`.
    pub u: [f64; 2],
    /// `Δξ` in 1D, mean incircle diameter in 2D.
    pub mesh_size: f64,
    pub time: f64,
    pub cells: usize,
}

impl ErrorReport {
    /// Largest of the three errors.
    pub fn max(&self) -> f64 {
        self.h.max(self.u[0]).max(self.u[1])
    }
}

/// Orders between consecutive reports, for `h` and the velocity component
/// `axis`.
pub fn convergence_table(reports: &[ErrorReport], axis: usize) -> Result<Vec<[f64; 2]>> {
    reports
        .windows(2)
        .map(|w| {
            Ok([
                convergence_order(w[0].h, w[0].mesh_size, w[1].h, w[1].mesh_size)?,
                convergence_order(w[0].u[axis], w[0].mesh_size, w[1].u[axis], w[1].mesh_size)?,
            ])
        })
        .collect()
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Header of the 1D profile CSV.
pub const CSV_1D_HEADER: &str = "xi,h,u,b,eta,g11,g12,g22";
/// Header of the 2D cell CSV.
pub const CSV_2D_HEADER: &str = "cell,x1,x2,h,u1,u2,b,eta";
/// Header of the convergence CSV.
pub const CSV_CONVERGENCE_HEADER: &str = "mesh_size,cells,err_h,order_h,err_u,order_u";

/// 1D profile; `u` is the velocity component along `axis`.
pub fn format_csv_1d(mesh: &Mesh1D, states: &[State], axis: usize) -> String {
    let mut s = String::with_capacity(200 * states.len());
    s.push_str(CSV_1D_HEADER);
    s.push('\n');
    for (k, q) in states.iter().enumerate() {
        let u = q.velocity()[axis];
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            mesh.center(k),
            q.h(),
            u,
            q.b(),
            q.eta(),
            q[crate::state::G11],
            q[crate::state::G12],
            q[crate::state::G22]
        );
    }
    s
}

pub fn write_csv_1d(path: &Path, mesh: &Mesh1D, states: &[State], axis: usize) -> Result<()> {
    write_file(path, &format_csv_1d(mesh, states, axis))
}

pub fn format_csv_2d(mesh: &PolyMesh, states: &[State]) -> String {
    let mut s = String::with_capacity(160 * states.len());
    s.push_str(CSV_2D_HEADER);
    s.push('\n');
    for (k, q) in states.iter().enumerate() {
        let c = mesh.cells[k].centroid;
        let u = q.velocity();
        let _ = writeln!(
            s,
            "{k},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c[0],
            c[1],
            q.h(),
            u[0],
            u[1],
            q.b(),
            q.eta()
        );
    }
    s
}

pub fn write_csv_2d(path: &Path, mesh: &PolyMesh, states: &[State]) -> Result<()> {
    write_file(path, &format_csv_2d(mesh, states))
}

/// Convergence table; orders are empty on the first row.
pub fn format_convergence_csv(reports: &[ErrorReport], axis: usize) -> Result<String> {
    let orders = convergence_table(reports, axis)?;
    let mut s = String::new();
    s.push_str(CSV_CONVERGENCE_HEADER);
    s.push('\n');
    for (i, r) in reports.iter().enumerate() {
        let (oh, ou) = if i == 0 {
            (String::new(), String::new())
        } else {
            (
                format!("{:.4}", orders[i - 1][0]),
                format!("{:.4}", orders[i - 1][1]),
            )
        };
        let _ = writeln!(
            s,
            "{:.16e},{},{:.16e},{oh},{:.16e},{ou}",
            r.mesh_size, r.cells, r.h, r.u[axis]
        );
    }
    Ok(s)
}

/// Legacy ASCII unstructured grid with polygon cells, points embedded in
/// 3D through `metric`, and cell arrays `h, u1, u2, b, eta`.
pub fn format_vtk_2d(mesh: &PolyMesh, states: &[State], metric: &MetricSpec, title: &str) -> String {
    let mut s = String::new();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let p = metric.embed(*v, 0.0);
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    let size: usize = mesh.cells.iter().map(|c| c.vertices.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.cells.len());
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.vertices.len());
        for v in &c.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cells.len());
    for _ in &mesh.cells {
        // VTK_POLYGON
        s.push_str("7\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.cells.len());
    type Field = (&'static str, fn(&State) -> f64);
    let fields: [Field; 5] = [
        ("h", |q| q.h()),
        ("u1", |q| q.velocity()[0]),
        ("u2", |q| q.velocity()[1]),
        ("b", |q| q.b()),
        ("eta", |q| q.eta()),
    ];
    for (name, f) in fields {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for q in states {
            let _ = writeln!(s, "{:.16e}", f(q));
        }
    }
    s
}

pub fn write_vtk_2d(
    path: &Path,
    mesh: &PolyMesh,
    states: &[State],
    metric: &MetricSpec,
    title: &str,
) -> Result<()> {
    write_file(path, &format_vtk_2d(mesh, states, metric, title))
}

/// Writes any text artifact, creating parent directories.
pub fn write_text(path: &Path, body: &str) -> Result<()> {
    write_file(path, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_closed_forms() {
        let mesh = Mesh1D::build(0.0, 1.0, 10).unwrap();
        let exact: Vec<f64> = mesh.centers();
        assert_eq!(l2_error(&mesh, &exact, |x| x), 0.0);
        let off: Vec<f64> = exact.iter().map(|x| x + 0.25).collect();
        assert!((l2_error(&mesh, &off, |x| x) - 0.25).abs() < 1e-15);
        let alt: Vec<f64> = exact
            .iter()
            .enumerate()
            .map(|(k, x)| x + if k % 2 == 0 { 1e-3 } else { -1e-3 })
            .collect();
        assert!((l2_error(&mesh, &alt, |x| x) - 1e-3).abs() < 1e-16);
    }

    #[test]
    fn orders() {
        assert!((convergence_order(1.0, 1.0, 0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(convergence_order(1.0, 1.0, 1.0, 0.5).unwrap(), 0.0);
        let o = convergence_order(1.1698e-5, 2e-2, 2.9651e-6, 1e-2).unwrap();
        assert!((o - 1.98).abs() < 5e-3);
        assert!(convergence_order(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(convergence_order(1.0, 1.0, 0.5, 1.0).is_err());
    }
}
