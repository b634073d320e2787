//! One-dimensional interval meshes and two-dimensional polygonal meshes.
//!
//! A [`PolyMesh`] is built from a vertex table and counterclockwise vertex
//! loops; edges, normals, ghost slots and stencils are derived. Every
//! boundary edge owns one ghost slot whose state the solver fills in, so
//! reconstruction stencils can address cells and ghosts uniformly: slots
//! `0..n_cells` are cells and `n_cells..n_slots` are ghosts.

mod io;
mod voronoi;

use std::collections::HashMap;

pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use voronoi::{build_voronoi, build_voronoi_from_seeds};

use crate::error::{Error, Result};

/// Axis-aligned chart rectangle `[lo₀, hi₀] × [lo₁, hi₁]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Bounds {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        if !(lo[0] < hi[0] && lo[1] < hi[1]) || !lo.iter().chain(&hi).all(|v| v.is_finite()) {
            return Err(Error::InvalidBounds(format!("{lo:?} .. {hi:?}")));
        }
        Ok(Bounds { lo, hi })
    }

    /// The square `[a, b]²`.
    pub fn square(a: f64, b: f64) -> Result<Self> {
        Bounds::new([a, a], [b, b])
    }

    pub fn extent(&self) -> [f64; 2] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]]
    }

    pub fn area(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1]
    }
}

/// Uniform partition of `[xi_left, xi_right]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    pub xi_left: f64,
    pub xi_right: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl Mesh1D {
    pub fn build(xi_left: f64, xi_right: f64, n_cells: usize) -> Result<Self> {
        if !(xi_left < xi_right) || !xi_left.is_finite() || !xi_right.is_finite() {
            return Err(Error::InvalidBounds(format!(
                "interval [{xi_left}, {xi_right}] is empty"
            )));
        }
        if n_cells < 3 {
            return Err(Error::InvalidBounds(format!(
                "need at least 3 cells, got {n_cells}"
            )));
        }
        Ok(Mesh1D {
            xi_left,
            xi_right,
            n_cells,
            dx: (xi_right - xi_left) / n_cells as f64,
        })
    }

    #[inline]
    pub fn center(&self, k: usize) -> f64 {
        self.xi_left + (k as f64 + 0.5) * self.dx
    }

    /// Center of a cell indexed relative to the first interior cell; negative
    /// indices and indices past the end address ghost cells.
    #[inline]
    pub fn center_signed(&self, k: isize) -> f64 {
        self.xi_left + (k as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|k| self.center(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_cells
    }

    pub fn is_empty(&self) -> bool {
        self.n_cells == 0
    }
}

/// The far side of an edge, seen from its left cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeRight {
    /// Neighbouring cell; its centroid image across the edge sits at
    /// `centroid + shift` (nonzero only across periodic seams).
    Cell { cell: usize, shift: [f64; 2] },
    /// Domain boundary with its ghost index.
    Boundary { ghost: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub midpoint: [f64; 2],
    pub length: f64,
    /// Unit normal pointing from the left cell to the right side.
    pub normal: [f64; 2],
    pub left: usize,
    pub right: EdgeRight,
}

/// One face of a cell as seen from that cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub edge: usize,
    /// `+1` if the cell is the edge's left cell (the edge normal points
    /// outward), `−1` otherwise.
    pub sign: f64,
    /// Slot of the cell or ghost across the face.
    pub neighbor: usize,
    /// Edge midpoint relative to this cell's centroid.
    pub midpoint_offset: [f64; 2],
    /// Neighbour centroid (periodic image or mirrored ghost) relative to
    /// this cell's centroid.
    pub neighbor_offset: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    /// Counterclockwise vertex loop.
    pub vertices: Vec<usize>,
    pub centroid: [f64; 2],
    pub area: f64,
    pub perimeter: f64,
    pub faces: Vec<Face>,
}

/// Ghost cell mirrored across a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ghost {
    pub edge: usize,
    pub interior: usize,
    pub centroid: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyMesh {
    pub bounds: Bounds,
    pub periodic: [bool; 2],
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    pub ghosts: Vec<Ghost>,
}

/// Signed area and centroid of a closed polygon.
pub fn polygon_area_centroid(points: &[[f64; 2]]) -> (f64, [f64; 2]) {
    // shift to the first vertex to limit cancellation
    let o = points[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..points.len() {
        let p = points[i];
        let q = points[(i + 1) % points.len()];
        let (px, py) = (p[0] - o[0], p[1] - o[1]);
        let (qx, qy) = (q[0] - o[0], q[1] - o[1]);
        let cross = px * qy - qx * py;
        a2 += cross;
        cx += (px + qx) * cross;
        cy += (py + qy) * cross;
    }
    let area = 0.5 * a2;
    if a2 == 0.0 {
        return (0.0, o);
    }
    (area, [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)])
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

impl PolyMesh {
    /// Derives the full connectivity from counterclockwise vertex loops.
    ///
    /// Unpaired edges along a periodic axis are matched with their
    /// translate on the opposite side of the bounding box.
    pub fn from_polygons(
        vertices: Vec<[f64; 2]>,
        loops: Vec<Vec<usize>>,
        periodic: [bool; 2],
    ) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::NonConforming("mesh has no cells".into()));
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &vertices {
            for a in 0..2 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        let bounds = Bounds::new(lo, hi)?;
        let area_floor = 1e-12 * bounds.area();

        let mut cells = Vec::with_capacity(loops.len());
        for (k, lp) in loops.into_iter().enumerate() {
            if lp.len() < 3 {
                return Err(Error::DegenerateCell { cell: k, area: 0.0 });
            }
            if let Some(&bad) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::NonConforming(format!(
                    "cell {k} references missing vertex {bad}"
                )));
            }
            let pts: Vec<[f64; 2]> = lp.iter().map(|&v| vertices[v]).collect();
            let (area, centroid) = polygon_area_centroid(&pts);
            if !(area > area_floor) {
                return Err(Error::DegenerateCell { cell: k, area });
            }
            let perimeter = (0..pts.len())
                .map(|i| {
                    let d = sub(pts[(i + 1) % pts.len()], pts[i]);
                    d[0].hypot(d[1])
                })
                .sum();
            cells.push(Cell {
                vertices: lp,
                centroid,
                area,
                perimeter,
                faces: Vec::new(),
            });
        }

        // (left cell, right cell or None), keyed by directed vertex pair of the left cell
        struct Proto {
            a: usize,
            b: usize,
            left: usize,
            right: Option<(usize, [f64; 2])>,
            alias: bool,
        }
        let mut protos: Vec<Proto> = Vec::new();
        let mut by_key: HashMap<(usize, usize), usize> = HashMap::new();
        // per cell: (proto edge, cell is the edge's left cell)
        let mut cell_faces: Vec<Vec<(usize, bool)>> = vec![Vec::new(); cells.len()];
        for (k, cell) in cells.iter().enumerate() {
            let n = cell.vertices.len();
            for i in 0..n {
                let a = cell.vertices[i];
                let b = cell.vertices[(i + 1) % n];
                if a == b {
                    return Err(Error::NonConforming(format!(
                        "cell {k} repeats vertex {a}"
                    )));
                }
                let key = (a.min(b), a.max(b));
                match by_key.get(&key) {
                    None => {
                        by_key.insert(key, protos.len());
                        cell_faces[k].push((protos.len(), true));
                        protos.push(Proto {
                            a,
                            b,
                            left: k,
                            right: None,
                            alias: false,
                        });
                    }
                    Some(&e) => {
                        let p = &mut protos[e];
                        if p.right.is_some() || p.a != b || p.b != a {
                            return Err(Error::NonConforming(format!(
                                "edge ({a}, {b}) of cell {k} is shared inconsistently"
                            )));
                        }
                        p.right = Some((k, [0.0, 0.0]));
                        cell_faces[k].push((e, false));
                    }
                }
            }
        }

        // periodic seams: pair unmatched edges on opposite sides
        let extent = bounds.extent();
        for axis in 0..2 {
            if !periodic[axis] {
                continue;
            }
            let other = 1 - axis;
            let tol = 1e-9 * extent[axis].max(extent[other]);
            let on_side = |p: &Proto, value: f64| {
                (vertices[p.a][axis] - value).abs() <= tol
                    && (vertices[p.b][axis] - value).abs() <= tol
            };
            let lo_side: Vec<usize> = (0..protos.len())
                .filter(|&e| protos[e].right.is_none() && on_side(&protos[e], lo[axis]))
                .collect();
            let mut hi_side: Vec<usize> = (0..protos.len())
                .filter(|&e| protos[e].right.is_none() && on_side(&protos[e], hi[axis]))
                .collect();
            if lo_side.len() != hi_side.len() {
                return Err(Error::NonConforming(format!(
                    "periodic axis {axis}: {} edges on the low side, {} on the high side",
                    lo_side.len(),
                    hi_side.len()
                )));
            }
            let mid = |p: &Proto, c: usize| 0.5 * (vertices[p.a][c] + vertices[p.b][c]);
            for &e_lo in &lo_side {
                let m = mid(&protos[e_lo], other);
                let pos = hi_side
                    .iter()
                    .position(|&e| (mid(&protos[e], other) - m).abs() <= tol)
                    .ok_or_else(|| {
                        Error::NonConforming(format!(
                            "periodic axis {axis}: no partner for edge at {m}"
                        ))
                    })?;
                let e_hi = hi_side.swap_remove(pos);
                let mut shift = [0.0; 2];
                shift[axis] = extent[axis];
                let low_cell = protos[e_lo].left;
                protos[e_hi].right = Some((low_cell, shift));
                protos[e_lo].alias = true;
                for f in cell_faces[low_cell].iter_mut() {
                    if f.0 == e_lo {
                        *f = (e_hi, false);
                    }
                }
            }
        }

        // compact, build geometric edge data and ghosts
        let mut new_id = vec![usize::MAX; protos.len()];
        let mut edges = Vec::with_capacity(protos.len());
        let mut ghosts = Vec::new();
        for (e, p) in protos.iter().enumerate() {
            if p.alias {
                continue;
            }
            new_id[e] = edges.len();
            let va = vertices[p.a];
            let vb = vertices[p.b];
            let d = sub(vb, va);
            let length = d[0].hypot(d[1]);
            let normal = [d[1] / length, -d[0] / length];
            let midpoint = [0.5 * (va[0] + vb[0]), 0.5 * (va[1] + vb[1])];
            let right = match p.right {
                Some((cell, shift)) => EdgeRight::Cell { cell, shift },
                None => {
                    let xk = cells[p.left].centroid;
                    let dist = (midpoint[0] - xk[0]) * normal[0] + (midpoint[1] - xk[1]) * normal[1];
                    let centroid = [xk[0] + 2.0 * dist * normal[0], xk[1] + 2.0 * dist * normal[1]];
                    ghosts.push(Ghost {
                        edge: edges.len(),
                        interior: p.left,
                        centroid,
                    });
                    EdgeRight::Boundary {
                        ghost: ghosts.len() - 1,
                    }
                }
            };
            edges.push(Edge {
                vertices: [p.a, p.b],
                midpoint,
                length,
                normal,
                left: p.left,
                right,
            });
        }

        let n_cells = cells.len();
        for k in 0..n_cells {
            let xk = cells[k].centroid;
            let mut faces = Vec::with_capacity(cell_faces[k].len());
            for &(pe, is_left) in &cell_faces[k] {
                let e = new_id[pe];
                let edge = &edges[e];
                let face = if is_left {
                    let (neighbor, pos) = match edge.right {
                        EdgeRight::Cell { cell, shift } => (cell, add(cells[cell].centroid, shift)),
                        EdgeRight::Boundary { ghost } => (n_cells + ghost, ghosts[ghost].centroid),
                    };
                    Face {
                        edge: e,
                        sign: 1.0,
                        neighbor,
                        midpoint_offset: sub(edge.midpoint, xk),
                        neighbor_offset: sub(pos, xk),
                    }
                } else {
                    let shift = match edge.right {
                        EdgeRight::Cell { shift, .. } => shift,
                        EdgeRight::Boundary { .. } => unreachable!("boundary edges have no right cell"),
                    };
                    let xl = cells[edge.left].centroid;
                    Face {
                        edge: e,
                        sign: -1.0,
                        neighbor: edge.left,
                        midpoint_offset: sub(sub(edge.midpoint, shift), xk),
                        neighbor_offset: sub(sub(xl, shift), xk),
                    }
                };
                faces.push(face);
            }
            cells[k].faces = faces;
        }

        let mesh = PolyMesh {
            bounds,
            periodic,
            vertices,
            cells,
            edges,
            ghosts,
        };
        mesh.check_convexity()?;
        Ok(mesh)
    }

    fn check_convexity(&self) -> Result<()> {
        for (k, cell) in self.cells.iter().enumerate() {
            let n = cell.vertices.len();
            for i in 0..n {
                let p = self.vertices[cell.vertices[i]];
                let q = self.vertices[cell.vertices[(i + 1) % n]];
                let r = self.vertices[cell.vertices[(i + 2) % n]];
                let u = sub(q, p);
                let v = sub(r, q);
                let cross = u[0] * v[1] - u[1] * v[0];
                let scale = u[0].hypot(u[1]) * v[0].hypot(v[1]);
                if cross < -1e-9 * scale {
                    return Err(Error::NonConforming(format!(
                        "cell {k} is not convex at vertex {}",
                        cell.vertices[(i + 1) % n]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Cells plus ghosts.
    pub fn n_slots(&self) -> usize {
        self.cells.len() + self.ghosts.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Diameter `4|Ω|/perimeter` of the incircle of a tangential polygon.
    pub fn incircle_diameter(&self, k: usize) -> f64 {
        4.0 * self.cells[k].area / self.cells[k].perimeter
    }

    /// Average incircle diameter `d_N`, the characteristic mesh size.
    pub fn mean_incircle_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|k| self.incircle_diameter(k)).sum::<f64>() / self.n_cells() as f64
    }

    /// `|Σₑ |e| nₑ|` over the outward normals of cell `k`.
    pub fn closure_residual(&self, k: usize) -> f64 {
        let mut s = [0.0; 2];
        for f in &self.cells[k].faces {
            let e = &self.edges[f.edge];
            s[0] += f.sign * e.length * e.normal[0];
            s[1] += f.sign * e.length * e.normal[1];
        }
        s[0].hypot(s[1])
    }

    /// Vertex positions of cell `k` relative to its centroid.
    pub fn vertex_offsets(&self, k: usize) -> impl Iterator<Item = [f64; 2]> + '_ {
        let c = self.cells[k].centroid;
        self.cells[k]
            .vertices
            .iter()
            .map(move |&v| sub(self.vertices[v], c))
    }

    /// Position of a cell or ghost slot (periodic images not applied).
    pub fn slot_position(&self, slot: usize) -> [f64; 2] {
        if slot < self.cells.len() {
            self.cells[slot].centroid
        } else {
            self.ghosts[slot - self.cells.len()].centroid
        }
    }
}

/// Structured grid of `nx × ny` rectangles.
pub fn build_quad_grid(bounds: Bounds, nx: usize, ny: usize) -> Result<PolyMesh> {
    build_quad_grid_periodic(bounds, nx, ny, [false, false])
}

/// Structured grid with optional periodic seams per axis.
pub fn build_quad_grid_periodic(
    bounds: Bounds,
    nx: usize,
    ny: usize,
    periodic: [bool; 2],
) -> Result<PolyMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidBounds(format!("grid {nx}×{ny} is empty")));
    }
    for (axis, n) in [nx, ny].into_iter().enumerate() {
        if periodic[axis] && n < 3 {
            return Err(Error::InvalidBounds(format!(
                "periodic axis {axis} needs at least 3 cells"
            )));
        }
    }
    let [w, h] = bounds.extent();
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { bounds.hi[1] } else { bounds.lo[1] + h * j as f64 / ny as f64 };
        for i in 0..=nx {
            let x = if i == nx { bounds.hi[0] } else { bounds.lo[0] + w * i as f64 / nx as f64 };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut loops = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            loops.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolyMesh::from_polygons(vertices, loops, periodic)
}
