//! Space-time linear reconstruction for the MUSCL-Hancock predictor.
//!
//! Slopes come from least squares over the edge neighbours (2D) or from
//! minmod of one-sided differences (1D). In the free-surface mode the
//! reconstructed variables are `V = (η, m¹, m², b, γ₁₁, γ₁₂, γ₂₂)` and the
//! depth is always derived as `h = η − b`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::mesh::PolyMesh;
use crate::physics::{flux_normal, ncp_apply, ncp_apply_surface, DEPTH_FLOOR};
use crate::state::{directional, Direction, Gradient, State, B, H, NVAR, ZERO_GRADIENT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReconstructionMode {
    /// Reconstruct the conserved variables directly.
    #[default]
    Conservative,
    /// Reconstruct the free surface in place of the depth.
    WbEta,
}

impl ReconstructionMode {
    /// Maps a conserved state to the reconstructed variables.
    #[inline]
    pub fn to_variables(self, q: &State) -> State {
        match self {
            ReconstructionMode::Conservative => *q,
            ReconstructionMode::WbEta => {
                let mut v = *q;
                v[H] = q.eta();
                v
            }
        }
    }

    /// Inverse of [`Self::to_variables`].
    #[inline]
    pub fn to_state(self, v: &State) -> State {
        match self {
            ReconstructionMode::Conservative => *v,
            ReconstructionMode::WbEta => {
                let mut q = *v;
                q[H] = v[H] - v[B];
                q
            }
        }
    }

    /// Slope of the conserved variables from the slope of the
    /// reconstructed ones (`∇h = ∇η − ∇b`).
    #[inline]
    pub fn to_state_gradient(self, g: &Gradient) -> Gradient {
        match self {
            ReconstructionMode::Conservative => *g,
            ReconstructionMode::WbEta => {
                let mut out = *g;
                for d in out.iter_mut() {
                    d[H] -= d[B];
                }
                out
            }
        }
    }
}

impl ReconstructionMode {
    /// `B(Q)·∇Q` for a state `q` and a slope in reconstructed variables; in
    /// free-surface mode `∇η` is taken from the slope itself.
    pub fn ncp_source(self, q: &State, slope: &Gradient) -> Result<State> {
        let grad = self.to_state_gradient(slope);
        match self {
            ReconstructionMode::Conservative => ncp_apply(q, &grad),
            ReconstructionMode::WbEta => ncp_apply_surface(q, &grad, [slope[0][H], slope[1][H]]),
        }
    }
}

/// Linear space-time polynomial of one cell, in reconstructed variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellPolynomial {
    pub value: State,
    pub slope: Gradient,
    pub time_slope: State,
    pub center: [f64; 2],
    pub t0: f64,
}

impl CellPolynomial {
    /// Raw linear evaluation in reconstructed variables.
    #[inline]
    pub fn linear(&self, x: [f64; 2], t: f64) -> State {
        self.linear_offset([x[0] - self.center[0], x[1] - self.center[1]], t - self.t0)
    }

    /// Evaluation at offset `dx` from the centroid and time `dt` after `t0`.
    #[inline]
    pub fn linear_offset(&self, dx: [f64; 2], dt: f64) -> State {
        self.value + directional(&self.slope, dx) + self.time_slope * dt
    }

    /// Conserved state at `(x, t)`.
    pub fn evaluate(&self, x: [f64; 2], t: f64, mode: ReconstructionMode) -> Result<State> {
        let q = mode.to_state(&self.linear(x, t));
        if !(q.h() >= DEPTH_FLOOR) {
            return Err(Error::NonPositiveDepth { h: q.h() });
        }
        Ok(q)
    }
}

/// Precomputed least-squares weights: `∇Q_k = Σ_l w_kl (Q_l − Q_k)` over
/// the faces of cell `k`, in face order.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    weights: Vec<Vec<[f64; 2]>>,
}

impl LeastSquares {
    pub fn new(mesh: &PolyMesh) -> Result<Self> {
        let mut weights = Vec::with_capacity(mesh.n_cells());
        for (k, cell) in mesh.cells.iter().enumerate() {
            let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
            for f in &cell.faces {
                let d = f.neighbor_offset;
                a11 += d[0] * d[0];
                a12 += d[0] * d[1];
                a22 += d[1] * d[1];
            }
            let det = a11 * a22 - a12 * a12;
            let trace = a11 + a22;
            if !(det > 1e-12 * trace * trace) {
                return Err(Error::SingularStencil { cell: k });
            }
            let w = cell
                .faces
                .iter()
                .map(|f| {
                    let d = f.neighbor_offset;
                    [
                        (a22 * d[0] - a12 * d[1]) / det,
                        (-a12 * d[0] + a11 * d[1]) / det,
                    ]
                })
                .collect();
            weights.push(w);
        }
        Ok(LeastSquares { weights })
    }

    /// Unlimited slope of all components; `values` is indexed by slot.
    pub fn slope(&self, mesh: &PolyMesh, values: &[State], k: usize) -> Gradient {
        self.slope_components(mesh, values, k, 0..NVAR)
    }

    /// Unlimited slope of the components in `comps`; the rest are zero.
    pub fn slope_components(
        &self,
        mesh: &PolyMesh,
        values: &[State],
        k: usize,
        comps: Range<usize>,
    ) -> Gradient {
        let mut g = ZERO_GRADIENT;
        let qk = &values[k];
        for (f, w) in mesh.cells[k].faces.iter().zip(&self.weights[k]) {
            let ql = &values[f.neighbor];
            for c in comps.clone() {
                let d = ql[c] - qk[c];
                g[0][c] += w[0] * d;
                g[1][c] += w[1] * d;
            }
        }
        g
    }
}

/// Least-squares slope of cell `k` from its edge neighbours.
pub fn ls_slope(mesh: &PolyMesh, values: &[State], k: usize) -> Result<Gradient> {
    let cell = &mesh.cells[k];
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    let mut rhs = [State::ZERO; 2];
    for f in &cell.faces {
        let d = f.neighbor_offset;
        a11 += d[0] * d[0];
        a12 += d[0] * d[1];
        a22 += d[1] * d[1];
        let dq = values[f.neighbor] - values[k];
        rhs[0] += dq * d[0];
        rhs[1] += dq * d[1];
    }
    let det = a11 * a22 - a12 * a12;
    let trace = a11 + a22;
    if !(det > 1e-12 * trace * trace) {
        return Err(Error::SingularStencil { cell: k });
    }
    Ok([
        (rhs[0] * a22 - rhs[1] * a12) * (1.0 / det),
        (rhs[1] * a11 - rhs[0] * a12) * (1.0 / det),
    ])
}

/// Barth–Jespersen factor for one component: the largest `Φ ∈ [0, 1]` such
/// that `w + Φ δ_v` stays within `[w_min, w_max]` at every vertex.
#[inline]
pub fn barth_factor(w: f64, w_min: f64, w_max: f64, vertex_increments: impl Iterator<Item = f64>) -> f64 {
    let mut phi = 1.0_f64;
    for d in vertex_increments {
        let r = if d > 0.0 {
            (w_max - w) / d
        } else if d < 0.0 {
            (w_min - w) / d
        } else {
            continue;
        };
        phi = phi.min(r);
    }
    phi.max(0.0)
}

/// Component-wise Barth–Jespersen limiting of the components in `comps`.
pub fn barth_limit_components(
    mesh: &PolyMesh,
    values: &[State],
    k: usize,
    slope: &Gradient,
    comps: Range<usize>,
) -> Gradient {
    let cell = &mesh.cells[k];
    let qk = values[k];
    let mut lo = qk;
    let mut hi = qk;
    for f in &cell.faces {
        let ql = &values[f.neighbor];
        for c in comps.clone() {
            lo[c] = lo[c].min(ql[c]);
            hi[c] = hi[c].max(ql[c]);
        }
    }
    let mut out = *slope;
    for c in comps {
        if slope[0][c] == 0.0 && slope[1][c] == 0.0 {
            continue;
        }
        let phi = barth_factor(
            qk[c],
            lo[c],
            hi[c],
            mesh.vertex_offsets(k)
                .map(|v| slope[0][c] * v[0] + slope[1][c] * v[1]),
        );
        out[0][c] *= phi;
        out[1][c] *= phi;
    }
    out
}

/// Barth–Jespersen limiting of every component.
pub fn barth_limit(mesh: &PolyMesh, values: &[State], k: usize, slope: &Gradient) -> Gradient {
    barth_limit_components(mesh, values, k, slope, 0..NVAR)
}

/// `minmod(a, b)`: zero at sign changes, otherwise the smaller modulus.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Limited slope from three consecutive averages.
pub fn minmod_slope(left: &State, center: &State, right: &State, dx: f64) -> State {
    let mut s = State::ZERO;
    for c in 0..NVAR {
        s[c] = minmod((right[c] - center[c]) / dx, (center[c] - left[c]) / dx);
    }
    s
}

/// Unlimited central slope `(r − l)/(2Δξ)`.
pub fn central_slope(left: &State, right: &State, dx: f64) -> State {
    (*right - *left) * (0.5 / dx)
}

/// Central slope scaled per component so that both cell end values stay
/// within the range of the three averages (1D Barth–Jespersen).
pub fn barth_slope_1d(left: &State, center: &State, right: &State, dx: f64) -> State {
    let mut s = central_slope(left, right, dx);
    for c in 0..NVAR {
        let lo = left[c].min(center[c]).min(right[c]);
        let hi = left[c].max(center[c]).max(right[c]);
        let d = 0.5 * dx * s[c];
        s[c] *= barth_factor(center[c], lo, hi, [d, -d].into_iter());
    }
    s
}

/// Time slope of a 2D cell in reconstructed variables:
/// `−(1/|Ω|) Σ |e| F(w(x_e))·n − B(Q)·∇Q`.
///
/// `value` and `slope` are in reconstructed variables.
pub fn predictor_2d(
    mesh: &PolyMesh,
    k: usize,
    value: &State,
    slope: &Gradient,
    mode: ReconstructionMode,
) -> Result<State> {
    let cell = &mesh.cells[k];
    let mut div = State::ZERO;
    for f in &cell.faces {
        let e = &mesh.edges[f.edge];
        let v = *value + directional(slope, f.midpoint_offset);
        let q = mode.to_state(&v);
        let n = Direction::new(f.sign * e.normal[0], f.sign * e.normal[1]);
        div += flux_normal(&q, n)? * e.length;
    }
    let q = mode.to_state(value);
    let mut dt = div * (-1.0 / cell.area) - mode.ncp_source(&q, slope)?;
    // in free-surface variables ∂ₜη = ∂ₜh and the static entries stay zero
    for c in B..NVAR {
        dt[c] = 0.0;
    }
    Ok(dt)
}

/// Time slope of a 1D cell along `axis`:
/// `−[F(Q + ½Δξ s) − F(Q − ½Δξ s)]/Δξ − B(Q)·s`.
pub fn predictor_1d(
    value: &State,
    slope: &State,
    dx: f64,
    axis: usize,
    mode: ReconstructionMode,
) -> Result<State> {
    let n = Direction::axis(axis);
    let qr = mode.to_state(&(*value + *slope * (0.5 * dx)));
    let ql = mode.to_state(&(*value - *slope * (0.5 * dx)));
    let df = (flux_normal(&qr, n)? - flux_normal(&ql, n)?) * (1.0 / dx);
    let q = mode.to_state(value);
    let mut grad = ZERO_GRADIENT;
    grad[axis] = *slope;
    let mut dt = -df - mode.ncp_source(&q, &grad)?;
    for c in B..NVAR {
        dt[c] = 0.0;
    }
    Ok(dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_quad_grid, Bounds};

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-1.0, 2.0), 0.0);
        assert_eq!(minmod(3.0, 3.0), 3.0);
        assert_eq!(minmod(-2.0, -0.5), -0.5);
        assert_eq!(minmod(0.0, 4.0), 0.0);
    }

    #[test]
    fn minmod_slope_clips_extrema() {
        let a = State([1.0; NVAR]);
        let b = State([2.0; NVAR]);
        let c = State([3.0; NVAR]);
        assert_eq!(minmod_slope(&a, &b, &c, 0.5), State([2.0; NVAR]));
        assert_eq!(minmod_slope(&a, &b, &a, 0.5), State::ZERO);
    }

    fn grid_values(mesh: &PolyMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<State> {
        (0..mesh.n_slots())
            .map(|s| State([f(mesh.slot_position(s)); NVAR]))
            .collect()
    }

    #[test]
    fn linear_field_is_recovered() {
        let mesh = build_quad_grid(Bounds::square(0.0, 1.0).unwrap(), 5, 4).unwrap();
        let vals = grid_values(&mesh, |x| 0.3 + 2.0 * x[0] - 0.7 * x[1]);
        let ls = LeastSquares::new(&mesh).unwrap();
        for k in 0..mesh.n_cells() {
            let g = ls_slope(&mesh, &vals, k).unwrap();
            let h = ls.slope(&mesh, &vals, k);
            for c in 0..NVAR {
                assert!((g[0][c] - 2.0).abs() < 1e-13 && (g[1][c] + 0.7).abs() < 1e-13);
                assert!((h[0][c] - g[0][c]).abs() < 1e-13 && (h[1][c] - g[1][c]).abs() < 1e-13);
            }
            let lim = barth_limit(&mesh, &vals, k, &g);
            assert_eq!(lim, g);
        }
    }

    #[test]
    fn symmetric_stencil_gives_central_difference() {
        let mesh = build_quad_grid(Bounds::square(0.0, 3.0).unwrap(), 3, 3).unwrap();
        let centre = 4;
        let mut vals = vec![State::ZERO; mesh.n_slots()];
        for f in &mesh.cells[centre].faces {
            let d = f.neighbor_offset;
            // left 0, right 1, down 0, up 1
            vals[f.neighbor] = State([if d[0] > 0.5 || d[1] > 0.5 { 1.0 } else { 0.0 }; NVAR]);
        }
        let g = ls_slope(&mesh, &vals, centre).unwrap();
        assert!((g[0][0] - 0.5).abs() < 1e-15);
        assert!((g[1][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn barth_halves_a_double_overshoot() {
        let mesh = build_quad_grid(Bounds::square(0.0, 3.0).unwrap(), 3, 3).unwrap();
        let centre = 4;
        let mut vals = vec![State::ZERO; mesh.n_slots()];
        for f in &mesh.cells[centre].faces {
            let d = f.neighbor_offset[0];
            vals[f.neighbor] = State([if d > 0.5 { 1.0 } else if d < -0.5 { -1.0 } else { 0.0 }; NVAR]);
        }
        // vertex increment 0.5·4 = 2 against an allowed excursion of 1
        let slope = [State([4.0; NVAR]), State::ZERO];
        let lim = barth_limit(&mesh, &vals, centre, &slope);
        assert!((lim[0][0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_stencil() {
        let mesh = build_quad_grid(Bounds::square(0.0, 1.0).unwrap(), 3, 1).unwrap();
        // remove ghosts by pretending the stencil is a single row
        let mut m = mesh.clone();
        for c in m.cells.iter_mut() {
            c.faces.retain(|f| f.neighbor_offset[1] == 0.0);
        }
        assert!(matches!(ls_slope(&m, &vec![State::ZERO; m.n_slots()], 1), Err(Error::SingularStencil { cell: 1 })));
        assert!(LeastSquares::new(&m).is_err());
    }

    #[test]
    fn evaluation_identities() {
        let poly = CellPolynomial {
            value: State::new(3.0, 0.1, 0.2, 1.0, 1.0, 0.0, 1.0),
            slope: [State([0.5; NVAR]), State([0.25; NVAR])],
            time_slope: State([2.0; NVAR]),
            center: [0.2, 0.3],
            t0: 1.0,
        };
        assert_eq!(poly.linear([0.2, 0.3], 1.0), poly.value);
        let half = poly.linear([0.2, 0.3], 1.5);
        assert_eq!(half, poly.value + poly.time_slope * 0.5);
        let q = poly.evaluate([0.2, 0.3], 1.0, ReconstructionMode::WbEta).unwrap();
        assert_eq!(q.h(), 2.0);
        assert_eq!(q.eta(), 3.0);
    }

    #[test]
    fn rest_predictor_is_zero_in_free_surface_mode() {
        let q = State::at_rest(3.0, 0.7, [1.0, 0.0, 1.0]);
        let v = ReconstructionMode::WbEta.to_variables(&q);
        let mut slope = ZERO_GRADIENT;
        slope[0][B] = 0.4;
        slope[1][B] = -0.3;
        let mesh = build_quad_grid(Bounds::square(0.0, 1.0).unwrap(), 3, 3).unwrap();
        let dt = predictor_2d(&mesh, 4, &v, &slope, ReconstructionMode::WbEta).unwrap();
        assert_eq!(dt, State::ZERO);
        let dt = predictor_1d(&v, &slope[0], 0.1, 0, ReconstructionMode::WbEta).unwrap();
        assert_eq!(dt, State::ZERO);
    }
}
