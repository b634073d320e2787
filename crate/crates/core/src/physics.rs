//! Pointwise physics: fluxes, the nonconservative matrix action, wave
//! speeds, Rusanov fluxes and segment-path jump terms.
//!
//! The system is `∂ₜQ + ∂ⱼFʲ(Q) + Bʲ(Q) ∂ⱼQ = 0`. The flux is purely
//! kinetic; gravity and curvature both live in the matrices `Bʲ`, which
//! split into a free-surface block (rows m¹, m² against `∂h`, `∂b`) and a
//! metric block (rows h, m¹, m² against the metric slopes).

use crate::error::{Error, Result};
use crate::geometry::{CovariantMetric, MetricSpec, DET_FLOOR};
use crate::state::{Direction, Gradient, State, B, G11, G12, G22, H, M1, M2, NVAR};
use crate::GRAVITY;

/// Depths below this are rejected rather than clamped.
pub const DEPTH_FLOOR: f64 = 1e-12;

/// Three-point Gauss–Legendre rule on `[0, 1]`.
const GAUSS_NODES: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

#[inline]
fn check_depth(q: &State) -> Result<f64> {
    let h = q.h();
    if !(h >= DEPTH_FLOOR) {
        return Err(Error::NonPositiveDepth { h });
    }
    Ok(h)
}

#[inline]
fn check_det(q: &State) -> Result<f64> {
    let det = q[G11] * q[G22] - q[G12] * q[G12];
    if !(det > DET_FLOOR) {
        return Err(Error::PoleSingularity { det });
    }
    Ok(det)
}

/// Physical fluxes `(F¹, F²)`.
pub fn flux(q: &State) -> Result<[State; 2]> {
    let h = check_depth(q)?;
    let (m1, m2) = (q.m1(), q.m2());
    let mut f1 = State::ZERO;
    let mut f2 = State::ZERO;
    f1[H] = m1;
    f1[M1] = m1 * m1 / h;
    f1[M2] = m1 * m2 / h;
    f2[H] = m2;
    f2[M1] = m1 * m2 / h;
    f2[M2] = m2 * m2 / h;
    Ok([f1, f2])
}

/// Normal flux `F(Q)·n = F¹n₁ + F²n₂`.
pub fn flux_normal(q: &State, n: Direction) -> Result<State> {
    let h = check_depth(q)?;
    let mn = q.m1() * n.n1 + q.m2() * n.n2;
    let mut f = State::ZERO;
    f[H] = mn;
    f[M1] = q.m1() * mn / h;
    f[M2] = q.m2() * mn / h;
    Ok(f)
}

/// `B¹(Q)·∂₁Q + B²(Q)·∂₂Q`.
///
/// Only the first three rows are nonzero.
pub fn ncp_apply(q: &State, grad: &Gradient) -> Result<State> {
    let [d1, d2] = grad;
    ncp_apply_surface(q, grad, [d1[H] + d1[B], d2[H] + d2[B]])
}

/// [`ncp_apply`] with the free-surface gradient `∇η` supplied directly
/// instead of being summed from `∇h + ∇b`, so that a flat reconstructed
/// surface contributes exactly zero.
pub fn ncp_apply_surface(q: &State, grad: &Gradient, grad_eta: [f64; 2]) -> Result<State> {
    let h = check_depth(q)?;
    let det = check_det(q)?;
    let (m1, m2) = (q.m1(), q.m2());
    let (g11, g12, g22) = (q[G11], q[G12], q[G22]);
    let [d1, d2] = grad;

    let [deta1, deta2] = grad_eta;
    let gh = GRAVITY * h;

    // mass row: m^k ∂ₖ ln √γ
    let dlog = |d: &State| 0.5 * g22 * d[G11] - g12 * d[G12] + 0.5 * g11 * d[G22];
    let mass = m1 * dlog(d1) + m2 * dlog(d2);

    let inv_h = 1.0 / h;
    let m11 = m1 * m1;
    let m12 = m1 * m2;
    let m22 = m2 * m2;

    // metric block along x¹
    let r1_dir1 = m11 * g22 * inv_h * d1[G11] - 2.0 * m11 * g12 * inv_h * d1[G12]
        + 0.5 * (g11 * m11 - 2.0 * g12 * m12 - g22 * m22) * inv_h * d1[G22];
    let r2_dir1 = 0.5 * m1 * (g22 * m2 - g12 * m1) * inv_h * d1[G11]
        + m1 * (g11 * m1 - g12 * m2) * inv_h * d1[G12]
        + 0.5 * m2 * (3.0 * g11 * m1 + g12 * m2) * inv_h * d1[G22];
    // metric block along x²: the mirror image of the x¹ block under 1 ↔ 2
    let r1_dir2 = 0.5 * m1 * (g12 * m1 + 3.0 * g22 * m2) * inv_h * d2[G11]
        + m2 * (g22 * m2 - g12 * m1) * inv_h * d2[G12]
        + 0.5 * m2 * (g11 * m1 - g12 * m2) * inv_h * d2[G22];
    let r2_dir2 = 0.5 * (g22 * m22 - 2.0 * g12 * m12 - g11 * m11) * inv_h * d2[G11]
        - 2.0 * g12 * m22 * inv_h * d2[G12]
        + g11 * m22 * inv_h * d2[G22];

    let mut out = State::ZERO;
    out[H] = mass / det;
    out[M1] = (gh * (g22 * deta1 - g12 * deta2) + r1_dir1 + r1_dir2) / det;
    out[M2] = (gh * (g11 * deta2 - g12 * deta1) + r2_dir1 + r2_dir2) / det;
    Ok(out)
}

/// `(B¹n₁ + B²n₂)(Q)·v`.
#[inline]
pub fn ncp_normal(q: &State, n: Direction, v: &State) -> Result<State> {
    ncp_apply(q, &[*v * n.n1, *v * n.n2])
}

/// Quasi-linear flux divergence `Σⱼ (∂Fʲ/∂Q)·∂ⱼQ`.
pub fn flux_divergence(q: &State, grad: &Gradient) -> Result<State> {
    let mut out = State::ZERO;
    for (axis, d) in grad.iter().enumerate() {
        let a = flux_jacobian(q, Direction::axis(axis))?;
        for (r, row) in a.iter().enumerate().take(3) {
            out[r] += row.iter().zip(d.0).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok(out)
}

/// `∂(F·n)/∂Q` as a dense 7×7 matrix.
pub fn flux_jacobian(q: &State, n: Direction) -> Result<[[f64; NVAR]; NVAR]> {
    let h = check_depth(q)?;
    let (m1, m2) = (q.m1(), q.m2());
    let mn = m1 * n.n1 + m2 * n.n2;
    let mut a = [[0.0; NVAR]; NVAR];
    a[H][M1] = n.n1;
    a[H][M2] = n.n2;
    a[M1][H] = -m1 * mn / (h * h);
    a[M1][M1] = (mn + m1 * n.n1) / h;
    a[M1][M2] = m1 * n.n2 / h;
    a[M2][H] = -m2 * mn / (h * h);
    a[M2][M1] = m2 * n.n1 / h;
    a[M2][M2] = (mn + m2 * n.n2) / h;
    Ok(a)
}

/// Full directional matrix `(∂F/∂Q + B)·n` of the quasi-linear system.
pub fn directional_jacobian(q: &State, n: Direction) -> Result<[[f64; NVAR]; NVAR]> {
    let mut a = flux_jacobian(q, n)?;
    for col in 0..NVAR {
        let mut e = State::ZERO;
        e[col] = 1.0;
        let bcol = ncp_normal(q, n, &e)?;
        for (row, a_row) in a.iter_mut().enumerate() {
            a_row[col] += bcol[row];
        }
    }
    Ok(a)
}

/// `c = √(gh · nᵀγ^ij n)`.
#[inline]
fn celerity(q: &State, n: Direction) -> Result<f64> {
    let h = check_depth(q)?;
    let cm = CovariantMetric::from_array(q.metric()).contravariant()?;
    Ok((GRAVITY * h * cm.quadratic_form(n.as_array())).sqrt())
}

/// The three dynamic eigenvalues `(u·n − c, u·n, u·n + c)`; the remaining
/// four eigenvalues of the 7×7 system are zero.
pub fn eigenvalues(q: &State, n: Direction) -> Result<[f64; 3]> {
    let c = celerity(q, n)?;
    let u = q.velocity();
    let un = u[0] * n.n1 + u[1] * n.n2;
    Ok([un - c, un, un + c])
}

/// `|u·n| + c`, the largest eigenvalue modulus along `n`.
#[inline]
pub fn max_wave_speed(q: &State, n: Direction) -> Result<f64> {
    let c = celerity(q, n)?;
    let u = q.velocity();
    Ok((u[0] * n.n1 + u[1] * n.n2).abs() + c)
}

/// Upper bound of `|λ|` over all unit chart directions:
/// `|u|₂ + √(gh μ_max)` with `μ_max` the largest eigenvalue of `γ^ij`.
pub fn cell_wave_speed(q: &State) -> Result<f64> {
    let h = check_depth(q)?;
    let mu = CovariantMetric::from_array(q.metric()).max_eigen()?;
    let u = q.velocity();
    Ok(u[0].hypot(u[1]) + (GRAVITY * h * mu).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RusanovMode {
    /// Dissipation on `(h, m¹, m²)`.
    Standard,
    /// Depth-row dissipation applied to the free-surface jump `η⁺ − η⁻`.
    WellBalanced,
}

/// Rusanov flux `½(F⁺ + F⁻)·n − ½ s_max Ĩ (q⁺ − q⁻)`.
pub fn rusanov(qm: &State, qp: &State, n: Direction, mode: RusanovMode) -> Result<State> {
    let fm = flux_normal(qm, n)?;
    let fp = flux_normal(qp, n)?;
    let dh = match mode {
        RusanovMode::Standard => qp[H] - qm[H],
        RusanovMode::WellBalanced => qp.eta() - qm.eta(),
    };
    rusanov_dissipating(qm, qp, n, fm, fp, dh)
}

/// Well-balanced Rusanov flux with the free-surface jump `η⁺ − η⁻`
/// supplied by the caller.
pub fn rusanov_surface(qm: &State, qp: &State, n: Direction, jump_eta: f64) -> Result<State> {
    let fm = flux_normal(qm, n)?;
    let fp = flux_normal(qp, n)?;
    rusanov_dissipating(qm, qp, n, fm, fp, jump_eta)
}

fn rusanov_dissipating(
    qm: &State,
    qp: &State,
    n: Direction,
    fm: State,
    fp: State,
    dh: f64,
) -> Result<State> {
    let s = max_wave_speed(qm, n)?.max(max_wave_speed(qp, n)?);
    let mut out = (fm + fp) * 0.5;
    out[H] -= 0.5 * s * dh;
    out[M1] -= 0.5 * s * (qp[M1] - qm[M1]);
    out[M2] -= 0.5 * s * (qp[M2] - qm[M2]);
    Ok(out)
}

/// Segment-path jump `½ ∫₀¹ B(Ψ(τ))·n dτ (q⁺ − q⁻)`.
pub fn path_jump(qm: &State, qp: &State, n: Direction) -> Result<State> {
    let delta = *qp - *qm;
    path_jump_surface(qm, qp, n, delta[H] + delta[B])
}

/// [`path_jump`] with the free-surface jump `η⁺ − η⁻` supplied directly.
pub fn path_jump_surface(qm: &State, qp: &State, n: Direction, jump_eta: f64) -> Result<State> {
    let delta = *qp - *qm;
    if jump_eta == 0.0 && delta.0[..NVAR].iter().all(|&d| d == 0.0) {
        return Ok(State::ZERO);
    }
    let dir = [delta * n.n1, delta * n.n2];
    let deta = [jump_eta * n.n1, jump_eta * n.n2];
    let mut out = State::ZERO;
    for (tau, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
        let psi = *qm + delta * *tau;
        out += ncp_apply_surface(&psi, &dir, deta)? * w;
    }
    Ok(out * 0.5)
}

/// Pointwise values and exact chart gradients of smooth physical fields.
///
/// `grad_m[i][j] = ∂ⱼ mⁱ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothFields {
    pub h: f64,
    pub m: [f64; 2],
    pub b: f64,
    pub grad_h: [f64; 2],
    pub grad_m: [[f64; 2]; 2],
    pub grad_b: [f64; 2],
}

impl SmoothFields {
    /// The state at the sample point with the metric of `spec`.
    pub fn state(&self, spec: &MetricSpec, x: [f64; 2]) -> Result<State> {
        let g = spec.eval_metric(x)?;
        Ok(State::new(
            self.h, self.m[0], self.m[1], self.b, g.g11, g.g12, g.g22,
        ))
    }

    /// Exact gradient of the state, metric slopes included.
    pub fn gradient(&self, spec: &MetricSpec, x: [f64; 2]) -> Gradient {
        let dg = spec.metric_gradient(x);
        let mut grad = [State::ZERO; 2];
        for j in 0..2 {
            grad[j] = State::new(
                self.grad_h[j],
                self.grad_m[0][j],
                self.grad_m[1][j],
                self.grad_b[j],
                dg[j][0],
                dg[j][1],
                dg[j][2],
            );
        }
        grad
    }
}

/// Spatial operator of the original covariant balance law, written with
/// Christoffel symbols computed from exact metric derivatives.
///
/// Returns `(∂ⱼmʲ + Γʲⱼₖmᵏ, ∂ⱼTⁱʲ + ΓⁱⱼₖTᵏʲ + ΓʲⱼₖTⁱᵏ − Sⁱ)` in the first
/// three slots.
pub fn christoffel_residual(spec: &MetricSpec, f: &SmoothFields, x: [f64; 2]) -> Result<State> {
    if !(f.h >= DEPTH_FLOOR) {
        return Err(Error::NonPositiveDepth { h: f.h });
    }
    let g = spec.eval_metric(x)?;
    let c = g.contravariant()?;
    let inv = [[c.g11, c.g12], [c.g12, c.g22]];
    let dg = spec.metric_gradient(x);
    // dcov[k][a][b] = ∂ₖ γ_ab
    let mut dcov = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        dcov[k] = [[dg[k][0], dg[k][1]], [dg[k][1], dg[k][2]]];
    }
    // ∂ₖ γ^ij = −γ^ia ∂ₖγ_ab γ^bj
    let mut dinv = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s -= inv[i][a] * dcov[k][a][b] * inv[b][j];
                    }
                }
                dinv[k][i][j] = s;
            }
        }
    }
    // Γⁱⱼₖ = ½ γ^il (∂ⱼγ_lk + ∂ₖγ_lj − ∂ₗγ_jk)
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += inv[i][l] * (dcov[j][l][k] + dcov[k][l][j] - dcov[l][j][k]);
                }
                gamma[i][j][k] = 0.5 * s;
            }
        }
    }

    let h = f.h;
    let m = f.m;
    let t = |i: usize, j: usize| m[i] * m[j] / h + 0.5 * GRAVITY * h * h * inv[i][j];
    // ∂ⱼ Tⁱʲ summed over j
    let div_t = |i: usize| {
        let mut s = 0.0;
        for j in 0..2 {
            s += (f.grad_m[i][j] * m[j] + m[i] * f.grad_m[j][j]) / h
                - m[i] * m[j] * f.grad_h[j] / (h * h)
                + GRAVITY * h * f.grad_h[j] * inv[i][j]
                + 0.5 * GRAVITY * h * h * dinv[j][i][j];
        }
        s
    };

    let mut out = State::ZERO;
    let mut mass = f.grad_m[0][0] + f.grad_m[1][1];
    for j in 0..2 {
        for k in 0..2 {
            mass += gamma[j][j][k] * m[k];
        }
    }
    out[H] = mass;
    for i in 0..2 {
        let mut r = div_t(i);
        for j in 0..2 {
            for k in 0..2 {
                r += gamma[i][j][k] * t(k, j) + gamma[j][j][k] * t(i, k);
            }
            // −Sⁱ = + g h γ^ij ∂ⱼb
            r += GRAVITY * h * inv[i][j] * f.grad_b[j];
        }
        out[1 + i] = r;
    }
    Ok(out)
}
