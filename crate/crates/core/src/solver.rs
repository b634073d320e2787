//! Time integration: CFL control, ghost cells and the MUSCL-Hancock finite
//! volume update in its standard, rest-preserving and
//! equilibrium-preserving variants.
//!
//! Every scheme reconstructs some variables `W` per cell:
//!
//! * `standard`: the conserved state `Q`;
//! * `wb_rest`: `V = (η, m, b, γ)`, with the depth re-derived as `η − b`;
//! * `wb_general`: the fluctuation `Q − Q^E` around a supplied equilibrium.
//!
//! Bathymetry and metric never evolve, so their slopes are computed once.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{EdgeRight, Mesh1D, PolyMesh};
use crate::physics::{
    cell_wave_speed, flux_normal, max_wave_speed, ncp_apply, path_jump, path_jump_surface,
    rusanov, rusanov_surface, RusanovMode, DEPTH_FLOOR,
};
use crate::reconstruction::{
    barth_limit_components, barth_slope_1d, central_slope, minmod_slope, predictor_1d,
    predictor_2d, LeastSquares, ReconstructionMode,
};
use crate::scenarios::{BoundaryRule, Scenario};
use crate::state::{
    depth_below, directional, Direction, Gradient, State, B, H, NVAR, N_DYNAMIC, ZERO_GRADIENT};

/// Smooth reference solution for the `wb_general` scheme.
pub trait Equilibrium: Send + Sync {
    fn state(&self, x: [f64; 2]) -> Result<State>;
    fn gradient(&self, x: [f64; 2]) -> Result<Gradient>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Standard,
    WbRest,
    WbGeneral,
}

impl Scheme {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "standard" => Ok(Scheme::Standard),
            "wb" | "wb_rest" | "wb-rest" => Ok(Scheme::WbRest),
            "wb-general" | "wb_general" => Ok(Scheme::WbGeneral),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme `{other}` (expected standard, wb or wb-general)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Standard => "standard",
            Scheme::WbRest => "wb",
            Scheme::WbGeneral => "wb-general",
        }
    }

    fn mode(self) -> ReconstructionMode {
        match self {
            Scheme::WbRest => ReconstructionMode::WbEta,
            _ => ReconstructionMode::Conservative,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limiter {
    /// Barth–Jespersen on a least-squares (2D) or central (1D) slope.
    Barth,
    /// 1D only.
    Minmod,
    /// Unlimited least-squares (2D) or central (1D) slope.
    None,
}

impl Limiter {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "barth" => Ok(Limiter::Barth),
            "minmod" => Ok(Limiter::Minmod),
            "none" => Ok(Limiter::None),
            other => Err(Error::InvalidConfig(format!(
                "unknown limiter `{other}` (expected barth, minmod or none)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Limiter::Barth => "barth",
            Limiter::Minmod => "minmod",
            Limiter::None => "none",
        }
    }
}

#[derive(Clone)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub t_end: f64,
    pub limiter: Limiter,
    /// Use the scenario's exact `∇b` instead of the reconstructed slope.
    pub exact_bathymetry_gradient: bool,
    /// Required by [`Scheme::WbGeneral`].
    pub equilibrium: Option<Arc<dyn Equilibrium>>,
}

impl fmt::Debug for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchemeConfig")
            .field("scheme", &self.scheme)
            .field("cfl", &self.cfl)
            .field("t_end", &self.t_end)
            .field("limiter", &self.limiter)
            .field("exact_bathymetry_gradient", &self.exact_bathymetry_gradient)
            .field("equilibrium", &self.equilibrium.is_some())
            .finish()
    }
}

impl SchemeConfig {
    /// Defaults for dimension `dim`: CFL `0.9/d`, minmod in 1D and Barth in 2D.
    pub fn new(scheme: Scheme, t_end: f64, dim: usize) -> Self {
        SchemeConfig {
            scheme,
            cfl: 0.9 / dim as f64,
            t_end,
            limiter: if dim == 1 { Limiter::Minmod } else { Limiter::Barth },
            exact_bathymetry_gradient: false,
            equilibrium: None,
        }
    }

    pub fn with_equilibrium(mut self, eq: Arc<dyn Equilibrium>) -> Self {
        self.equilibrium = Some(eq);
        self
    }

    pub fn with_limiter(mut self, limiter: Limiter) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bound = 1.0 / dim as f64;
        if !(self.cfl > 0.0 && self.cfl < bound) {
            return Err(Error::InvalidConfig(format!(
                "CFL {} outside (0, {bound})",
                self.cfl
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "final time {} must be positive",
                self.t_end
            )));
        }
        if self.scheme == Scheme::WbGeneral && self.equilibrium.is_none() {
            return Err(Error::InvalidConfig(
                "scheme wb-general needs an equilibrium".into(),
            ));
        }
        if dim == 2 && self.limiter == Limiter::Minmod {
            return Err(Error::InvalidConfig(
                "minmod is a 1D limiter; use barth or none in 2D".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub step: usize,
    pub averages: Vec<State>,
}

/// Boundary value across a non-periodic boundary at chart point `x`.
///
/// Periodic rules copy the paired cell, so `interior` is returned as is.
pub fn ghost_state(
    rule: BoundaryRule,
    scenario: &Scenario,
    interior: &State,
    x: [f64; 2],
) -> Result<State> {
    match rule {
        BoundaryRule::Periodic => Ok(*interior),
        BoundaryRule::DirichletExact => {
            let b = (scenario.bathymetry)(x);
            scenario.exact_state(x, b)
        }
        BoundaryRule::Transmissive => {
            let b = (scenario.bathymetry)(x);
            let g = scenario.metric.eval_metric(x)?;
            let h = depth_below(interior.eta(), b);
            if !(h > 0.0) {
                return Err(Error::NonPositiveDepth { h });
            }
            Ok(State::new(h, interior.m1(), interior.m2(), b, g.g11, g.g12, g.g22))
        }
    }
}

/// `cfl · Δξ / max_k(|u_axis| + c)` over the cell averages.
pub fn timestep_1d(mesh: &Mesh1D, averages: &[State], axis: usize, cfl: f64) -> Result<f64> {
    let n = Direction::axis(axis);
    let mut lambda = 0.0_f64;
    for (k, q) in averages.iter().enumerate() {
        lambda = lambda.max(max_wave_speed(q, n).map_err(|e| e.at_cell(k, f64::NAN))?);
    }
    Ok(cfl * mesh.dx / lambda)
}

/// `cfl · min_k |Ω_k| / (λ_k Σ_e |e|)` with `λ_k` bounding every
/// directional wave speed of the cell average.
pub fn timestep_2d(mesh: &PolyMesh, averages: &[State], cfl: f64) -> Result<f64> {
    let dt = mesh
        .cells
        .par_iter()
        .zip(averages.par_iter())
        .enumerate()
        .map(|(k, (c, q))| {
            let l = cell_wave_speed(q).map_err(|e| e.at_cell(k, f64::NAN))?;
            Ok(c.area / (l * c.perimeter))
        })
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))?;
    Ok(cfl * dt)
}

fn check_depth(q: State) -> Result<State> {
    if q.h() >= DEPTH_FLOOR && q.is_finite() {
        Ok(q)
    } else {
        Err(Error::NonPositiveDepth { h: q.h() })
    }
}

/// Converts between conserved states and reconstructed variables.
#[derive(Clone, Copy)]
struct Frame {
    scheme: Scheme,
}

impl Frame {
    /// `W` of a state whose equilibrium value is `eq`.
    #[inline]
    fn to_w(self, q: &State, eq: &State) -> State {
        match self.scheme {
            Scheme::Standard => *q,
            Scheme::WbRest => ReconstructionMode::WbEta.to_variables(q),
            Scheme::WbGeneral => *q - *eq,
        }
    }

    #[inline]
    fn to_q(self, w: &State, eq: &State) -> Result<State> {
        let q = match self.scheme {
            Scheme::Standard => *w,
            Scheme::WbRest => ReconstructionMode::WbEta.to_state(w),
            Scheme::WbGeneral => *eq + *w,
        };
        check_depth(q)
    }

    /// `B(q)·∇Q` from the slope of `W`.
    #[inline]
    fn source(self, q: &State, slope: &Gradient, eq_grad: &Gradient) -> Result<State> {
        match self.scheme {
            Scheme::WbRest => ReconstructionMode::WbEta.ncp_source(q, slope),
            _ => ncp_apply(q, &self.gradient(slope, eq_grad)),
        }
    }

    /// Numerical flux and half path jump between two interface states whose
    /// reconstructed values are `wm`, `wp`.
    #[inline]
    fn interface(
        self,
        (wm, qm): (&State, &State),
        (wp, qp): (&State, &State),
        n: Direction,
    ) -> Result<(State, State)> {
        match self.scheme {
            Scheme::WbRest => {
                let deta = wp[H] - wm[H];
                Ok((
                    rusanov_surface(qm, qp, n, deta)?,
                    path_jump_surface(qm, qp, n, deta)?,
                ))
            }
            _ => Ok((
                rusanov(qm, qp, n, RusanovMode::Standard)?,
                path_jump(qm, qp, n)?,
            )),
        }
    }

    #[inline]
    fn gradient(self, slope: &Gradient, eq_grad: &Gradient) -> Gradient {
        match self.scheme {
            Scheme::Standard => *slope,
            Scheme::WbRest => ReconstructionMode::WbEta.to_state_gradient(slope),
            Scheme::WbGeneral => [eq_grad[0] + slope[0], eq_grad[1] + slope[1]],
        }
    }
}

/// Transmissive ghosts in free-surface variables take the interior `η`
/// bit for bit; re-deriving it from `η − b_ghost` would leak round-off
/// mass through the boundary at every step.
fn copies_free_surface(rule: BoundaryRule, scheme: Scheme) -> bool {
    rule == BoundaryRule::Transmissive && scheme == Scheme::WbRest
}

fn freeze_static(mut dt: State) -> State {
    for c in B..NVAR {
        dt[c] = 0.0;
    }
    dt
}

/// Shared driver for both dimensions.
pub trait TimeStepper {
    fn state(&self) -> &SimulationState;
    fn t_end(&self) -> f64;
    /// Stable step for the current state.
    fn timestep(&self) -> Result<f64>;
    /// Advances by `dt`.
    fn step(&mut self, dt: f64) -> Result<()>;

    /// Advances by one CFL step, clipped to land on `t_end`. Returns
    /// `false` once `t_end` has been reached.
    fn advance(&mut self) -> Result<bool> {
        let t = self.state().t;
        let t_end = self.t_end();
        if t >= t_end {
            return Ok(false);
        }
        let dt = self.timestep()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("time step {dt} is not positive")));
        }
        self.step(dt.min(t_end - t))?;
        Ok(true)
    }

    /// Runs to `t_end`, calling `output` on the initial state, every
    /// `output_every` steps (0 disables) and on the final state.
    fn run<F>(&mut self, output_every: usize, mut output: F) -> Result<()>
    where
        F: FnMut(&SimulationState) -> Result<()>,
        Self: Sized,
    {
        output(self.state())?;
        let mut last = 0;
        while self.advance()? {
            let s = self.state().step;
            if output_every > 0 && s.is_multiple_of(output_every) {
                output(self.state())?;
                last = s;
            }
        }
        if self.state().step != last {
            output(self.state())?;
        }
        Ok(())
    }
}

/// Equilibrium data on the extended 1D index range `0..n + 4`.
struct Equilibrium1d {
    /// At cell centres.
    cell: Vec<State>,
    /// Derivative along the axis at cell centres.
    grad: Vec<Gradient>,
    /// At the left face of each extended cell (`n + 5` faces).
    face: Vec<State>,
    face_flux: Vec<State>,
    /// `B(Q^E)·∇Q^E` at cell centres.
    cell_term: Vec<State>,
}

/// Uniform 1D grid along one chart axis with two ghost layers per side.
pub struct Solver1d {
    mesh: Mesh1D,
    scenario: Scenario,
    config: SchemeConfig,
    axis: usize,
    normal: Direction,
    frame: Frame,
    state: SimulationState,
    /// Slopes of the static components of `W` on the extended range.
    static_slope: Vec<State>,
    eq: Option<Equilibrium1d>,
}

impl Solver1d {
    pub fn new(mesh: Mesh1D, scenario: Scenario, config: SchemeConfig) -> Result<Self> {
        let averages = scenario.initial_1d(&mesh)?;
        Self::with_initial(mesh, scenario, config, averages)
    }

    pub fn with_initial(
        mesh: Mesh1D,
        scenario: Scenario,
        config: SchemeConfig,
        averages: Vec<State>,
    ) -> Result<Self> {
        config.validate(1)?;
        if averages.len() != mesh.n_cells {
            return Err(Error::InvalidConfig(format!(
                "{} averages for {} cells",
                averages.len(),
                mesh.n_cells
            )));
        }
        let axis = scenario.axis();
        let mut solver = Solver1d {
            normal: Direction::axis(axis),
            frame: Frame {
                scheme: config.scheme,
            },
            state: SimulationState {
                t: 0.0,
                step: 0,
                averages,
            },
            static_slope: Vec::new(),
            eq: None,
            mesh,
            scenario,
            config,
            axis,
        };
        if let Some(eq) = solver.config.equilibrium.clone() {
            if solver.config.scheme == Scheme::WbGeneral {
                solver.eq = Some(solver.equilibrium_cache(eq.as_ref())?);
            }
        }
        solver.static_slope = solver.static_slopes()?;
        Ok(solver)
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn into_state(self) -> SimulationState {
        self.state
    }

    fn n(&self) -> usize {
        self.mesh.n_cells
    }

    /// Chart point of extended index `i` (cell `i − 2`).
    fn ext_point(&self, i: usize) -> [f64; 2] {
        self.scenario
            .point(self.mesh.center_signed(i as isize - 2))
    }

    fn face_point(&self, p: usize) -> [f64; 2] {
        self.scenario
            .point(self.mesh.xi_left + (p as f64 - 2.0) * self.mesh.dx)
    }

    fn equilibrium_cache(&self, eq: &dyn Equilibrium) -> Result<Equilibrium1d> {
        let n = self.n();
        let mut cell = Vec::with_capacity(n + 4);
        let mut grad = Vec::with_capacity(n + 4);
        let mut cell_term = Vec::with_capacity(n + 4);
        for i in 0..n + 4 {
            let x = self.ext_point(i);
            let q = eq.state(x)?;
            let mut g = ZERO_GRADIENT;
            g[self.axis] = eq.gradient(x)?[self.axis];
            cell_term.push(ncp_apply(&q, &g)?);
            cell.push(q);
            grad.push(g);
        }
        let mut face = Vec::with_capacity(n + 5);
        let mut face_flux = Vec::with_capacity(n + 5);
        for p in 0..n + 5 {
            let q = eq.state(self.face_point(p))?;
            face_flux.push(flux_normal(&q, self.normal)?);
            face.push(q);
        }
        Ok(Equilibrium1d {
            cell,
            grad,
            face,
            face_flux,
            cell_term,
        })
    }

    /// Interior index mirrored or wrapped by ghost index `i`.
    fn ghost_source(&self, i: usize) -> usize {
        let n = self.n();
        let periodic = self.scenario.boundary == BoundaryRule::Periodic;
        match (i, periodic) {
            (0, false) => 1,
            (1, false) => 0,
            (0, true) => n - 2,
            (1, true) => n - 1,
            (j, false) if j == n + 2 => n - 1,
            (j, false) if j == n + 3 => n - 2,
            (j, true) if j == n + 2 => 0,
            (j, true) if j == n + 3 => 1,
            _ => unreachable!("ghost index {i} out of range"),
        }
    }

    /// Conserved states on the extended range, ghosts included.
    pub fn extended(&self, averages: &[State]) -> Result<Vec<State>> {
        let n = self.n();
        let mut ext = Vec::with_capacity(n + 4);
        for i in 0..n + 4 {
            if (2..n + 2).contains(&i) {
                ext.push(averages[i - 2]);
            } else {
                let src = self.ghost_source(i);
                ext.push(
                    ghost_state(
                        self.scenario.boundary,
                        &self.scenario,
                        &averages[src],
                        self.ext_point(i),
                    )
                    .map_err(|e| e.at_cell(src, self.state.t))?,
                );
            }
        }
        Ok(ext)
    }

    fn eq_cell(&self, i: usize) -> State {
        self.eq.as_ref().map_or(State::ZERO, |e| e.cell[i])
    }

    fn eq_face(&self, p: usize) -> State {
        self.eq.as_ref().map_or(State::ZERO, |e| e.face[p])
    }

    fn eq_grad(&self, i: usize) -> Gradient {
        self.eq.as_ref().map_or(ZERO_GRADIENT, |e| e.grad[i])
    }

    fn to_w(&self, ext: &[State]) -> Vec<State> {
        let mut w: Vec<State> = ext
            .iter()
            .enumerate()
            .map(|(i, q)| self.frame.to_w(q, &self.eq_cell(i)))
            .collect();
        if copies_free_surface(self.scenario.boundary, self.config.scheme) {
            let n = self.n();
            for i in [0, 1, n + 2, n + 3] {
                w[i][H] = w[self.ghost_source(i) + 2][H];
            }
        }
        w
    }

    fn limited_slope(&self, w: &[State], i: usize) -> State {
        let dx = self.mesh.dx;
        match self.config.limiter {
            Limiter::Minmod => minmod_slope(&w[i - 1], &w[i], &w[i + 1], dx),
            Limiter::Barth => barth_slope_1d(&w[i - 1], &w[i], &w[i + 1], dx),
            Limiter::None => central_slope(&w[i - 1], &w[i + 1], dx),
        }
    }

    fn static_slopes(&self) -> Result<Vec<State>> {
        let n = self.n();
        let w = self.to_w(&self.extended(&self.state.averages)?);
        let exact_b = if self.config.exact_bathymetry_gradient {
            Some(self.scenario.bathymetry_gradient.clone().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "scenario `{}` has no exact bathymetry gradient",
                    self.scenario.name
                ))
            })?)
        } else {
            None
        };
        let mut out = vec![State::ZERO; n + 4];
        for (i, slot) in out.iter_mut().enumerate().take(n + 3).skip(1) {
            let s = self.limited_slope(&w, i);
            for c in B..NVAR {
                slot[c] = s[c];
            }
            if let Some(gb) = &exact_b {
                slot[B] = gb(self.ext_point(i))[self.axis] - self.eq_grad(i)[self.axis][B];
            }
        }
        Ok(out)
    }

    /// Time slope of `W` for the fluctuation scheme.
    fn fluctuation_predictor(&self, i: usize, w: &State, s: &State) -> Result<State> {
        let eq = self.eq.as_ref().expect("equilibrium cache present");
        let dx = self.mesh.dx;
        let (el, er) = (&eq.face[i], &eq.face[i + 1]);
        let qr = check_depth(*er + *w + *s * (0.5 * dx))?;
        let ql = check_depth(*el + *w - *s * (0.5 * dx))?;
        let df = (flux_normal(&qr, self.normal)? - eq.face_flux[i + 1]
            - flux_normal(&ql, self.normal)?
            + eq.face_flux[i])
            * (1.0 / dx);
        let q = check_depth(eq.cell[i] + *w)?;
        let mut slope = ZERO_GRADIENT;
        slope[self.axis] = *s;
        let grad = self.frame.gradient(&slope, &eq.grad[i]);
        Ok(freeze_static(-df - (ncp_apply(&q, &grad)? - eq.cell_term[i])))
    }
}

impl TimeStepper for Solver1d {
    fn state(&self) -> &SimulationState {
        &self.state
    }

    fn t_end(&self) -> f64 {
        self.config.t_end
    }

    fn timestep(&self) -> Result<f64> {
        timestep_1d(&self.mesh, &self.state.averages, self.axis, self.config.cfl)
            .map_err(|e| retime(e, self.state.t))
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let n = self.n();
        let t = self.state.t;
        let dx = self.mesh.dx;
        let mode = self.config.scheme.mode();
        let ext = self.extended(&self.state.averages)?;
        let w = self.to_w(&ext);
        let cell_of = |i: usize| (i as isize - 2).clamp(0, n as isize - 1) as usize;

        // slopes and predictor on interior cells and inner ghosts
        let mut slope = vec![State::ZERO; n + 4];
        let mut tslope = vec![State::ZERO; n + 4];
        for i in 1..n + 3 {
            let mut s = self.limited_slope(&w, i);
            for c in B..NVAR {
                s[c] = self.static_slope[i][c];
            }
            let ts = match self.config.scheme {
                Scheme::WbGeneral => self.fluctuation_predictor(i, &w[i], &s),
                _ => predictor_1d(&w[i], &s, dx, self.axis, mode),
            }
            .map_err(|e| e.at_cell(cell_of(i), t))?;
            slope[i] = s;
            tslope[i] = ts;
        }

        // interface terms: net flux and half path jump, faces p = 2..=n + 2
        let mut net = vec![State::ZERO; n + 5];
        let mut jump = vec![State::ZERO; n + 5];
        for p in 2..n + 3 {
            let (l, r) = (p - 1, p);
            let e = self.eq_face(p);
            let wm = w[l] + slope[l] * (0.5 * dx) + tslope[l] * (0.5 * dt);
            let wp = w[r] - slope[r] * (0.5 * dx) + tslope[r] * (0.5 * dt);
            let qm = self.frame.to_q(&wm, &e).map_err(|e| e.at_cell(cell_of(l), t))?;
            let qp = self.frame.to_q(&wp, &e).map_err(|e| e.at_cell(cell_of(r), t))?;
            let (mut f, j) = self
                .frame
                .interface((&wm, &qm), (&wp, &qp), self.normal)
                .map_err(|e| e.at_cell(cell_of(l), t))?;
            if let Some(eq) = &self.eq {
                f -= eq.face_flux[p];
            }
            net[p] = f;
            jump[p] = j;
        }

        let mut next = Vec::with_capacity(n);
        for k in 0..n {
            let i = k + 2;
            let q0 = ext[i];
            let mid = self
                .frame
                .to_q(&(w[i] + tslope[i] * (0.5 * dt)), &self.eq_cell(i))
                .map_err(|e| e.at_cell(k, t))?;
            let mut s = ZERO_GRADIENT;
            s[self.axis] = slope[i];
            let mut cell = self
                .frame
                .source(&mid, &s, &self.eq_grad(i))
                .map_err(|e| e.at_cell(k, t))?;
            if let Some(eq) = &self.eq {
                cell -= eq.cell_term[i];
            }
            let edge = net[i + 1] - net[i] + jump[i + 1] + jump[i];
            let mut q = q0;
            for c in 0..N_DYNAMIC {
                q[c] = q0[c] - dt / dx * edge[c] - dt * cell[c];
            }
            next.push(check_depth(q).map_err(|e| e.at_cell(k, t + dt))?);
        }
        self.state.averages = next;
        self.state.step += 1;
        self.state.t = if t + dt >= self.config.t_end || self.config.t_end - (t + dt) < 1e-14 * self.config.t_end {
            self.config.t_end
        } else {
            t + dt
        };
        Ok(())
    }
}

fn retime(e: Error, t: f64) -> Error {
    match e {
        Error::AtCell { cell, source, .. } => Error::AtCell { cell, time: t, source },
        e => e,
    }
}

/// Equilibrium data on a polygonal mesh.
struct Equilibrium2d {
    /// At cell centroids then ghost centroids (slot order).
    slot: Vec<State>,
    grad: Vec<Gradient>,
    /// At each edge midpoint, in the left cell's and the right side's frame.
    edge: Vec<[State; 2]>,
    edge_flux: Vec<[State; 2]>,
    cell_term: Vec<State>,
}

/// Finite volumes on a polygonal mesh with one ghost per boundary edge.
pub struct Solver2d {
    mesh: PolyMesh,
    scenario: Scenario,
    config: SchemeConfig,
    frame: Frame,
    ls: LeastSquares,
    state: SimulationState,
    static_slope: Vec<Gradient>,
    eq: Option<Equilibrium2d>,
}

/// Reconstruction data of one cell for one step.
#[derive(Clone, Copy)]
struct CellRecon {
    slope: Gradient,
    time_slope: State,
}

impl Solver2d {
    pub fn new(mesh: PolyMesh, scenario: Scenario, config: SchemeConfig) -> Result<Self> {
        let averages = scenario.initial_2d(&mesh)?;
        Self::with_initial(mesh, scenario, config, averages)
    }

    pub fn with_initial(
        mesh: PolyMesh,
        scenario: Scenario,
        config: SchemeConfig,
        averages: Vec<State>,
    ) -> Result<Self> {
        config.validate(2)?;
        if averages.len() != mesh.n_cells() {
            return Err(Error::InvalidConfig(format!(
                "{} averages for {} cells",
                averages.len(),
                mesh.n_cells()
            )));
        }
        if scenario.boundary == BoundaryRule::Periodic && !mesh.ghosts.is_empty() {
            return Err(Error::InvalidConfig(
                "periodic boundary needs a mesh periodic on both axes".into(),
            ));
        }
        let ls = LeastSquares::new(&mesh)?;
        let mut solver = Solver2d {
            frame: Frame {
                scheme: config.scheme,
            },
            state: SimulationState {
                t: 0.0,
                step: 0,
                averages,
            },
            static_slope: Vec::new(),
            eq: None,
            ls,
            mesh,
            scenario,
            config,
        };
        if let Some(eq) = solver.config.equilibrium.clone() {
            if solver.config.scheme == Scheme::WbGeneral {
                solver.eq = Some(solver.equilibrium_cache(eq.as_ref())?);
            }
        }
        solver.static_slope = solver.static_slopes()?;
        Ok(solver)
    }

    pub fn mesh(&self) -> &PolyMesh {
        &self.mesh
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn into_state(self) -> SimulationState {
        self.state
    }

    fn equilibrium_cache(&self, eq: &dyn Equilibrium) -> Result<Equilibrium2d> {
        let m = &self.mesh;
        let slot = (0..m.n_slots())
            .into_par_iter()
            .map(|s| eq.state(m.slot_position(s)))
            .collect::<Result<Vec<_>>>()?;
        let grad = m
            .cells
            .par_iter()
            .map(|c| eq.gradient(c.centroid))
            .collect::<Result<Vec<_>>>()?;
        let cell_term = slot[..m.n_cells()]
            .par_iter()
            .zip(grad.par_iter())
            .map(|(q, g)| ncp_apply(q, g))
            .collect::<Result<Vec<_>>>()?;
        let pairs = m
            .edges
            .par_iter()
            .map(|e| {
                let n = Direction::new(e.normal[0], e.normal[1]);
                let left = eq.state(e.midpoint)?;
                let right = match e.right {
                    EdgeRight::Cell { shift, .. } if shift != [0.0, 0.0] => {
                        eq.state([e.midpoint[0] - shift[0], e.midpoint[1] - shift[1]])?
                    }
                    _ => left,
                };
                Ok((
                    [left, right],
                    [flux_normal(&left, n)?, flux_normal(&right, n)?],
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (edge, edge_flux) = pairs.into_iter().unzip();
        Ok(Equilibrium2d {
            slot,
            grad,
            edge,
            edge_flux,
            cell_term,
        })
    }

    /// Conserved states per slot: cells, then one ghost per boundary edge.
    pub fn slot_states(&self, averages: &[State]) -> Result<Vec<State>> {
        let mut out = Vec::with_capacity(self.mesh.n_slots());
        out.extend_from_slice(averages);
        for g in &self.mesh.ghosts {
            out.push(
                ghost_state(self.scenario.boundary, &self.scenario, &averages[g.interior], g.centroid)
                    .map_err(|e| e.at_cell(g.interior, self.state.t))?,
            );
        }
        Ok(out)
    }

    fn eq_slot(&self, s: usize) -> State {
        self.eq.as_ref().map_or(State::ZERO, |e| e.slot[s])
    }

    fn to_w(&self, slots: &[State]) -> Vec<State> {
        let mut w: Vec<State> = slots
            .iter()
            .enumerate()
            .map(|(s, q)| self.frame.to_w(q, &self.eq_slot(s)))
            .collect();
        if copies_free_surface(self.scenario.boundary, self.config.scheme) {
            let nc = self.mesh.n_cells();
            for (g, ghost) in self.mesh.ghosts.iter().enumerate() {
                w[nc + g][H] = w[ghost.interior][H];
            }
        }
        w
    }

    fn dynamic_slope(&self, w: &[State], k: usize) -> Gradient {
        let s = self.ls.slope_components(&self.mesh, w, k, 0..N_DYNAMIC);
        match self.config.limiter {
            Limiter::Barth => barth_limit_components(&self.mesh, w, k, &s, 0..N_DYNAMIC),
            _ => s,
        }
    }

    fn static_slopes(&self) -> Result<Vec<Gradient>> {
        let w = self.to_w(&self.slot_states(&self.state.averages)?);
        let exact_b = if self.config.exact_bathymetry_gradient {
            Some(self.scenario.bathymetry_gradient.clone().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "scenario `{}` has no exact bathymetry gradient",
                    self.scenario.name
                ))
            })?)
        } else {
            None
        };
        Ok((0..self.mesh.n_cells())
            .into_par_iter()
            .map(|k| {
                let s = self.ls.slope_components(&self.mesh, &w, k, B..NVAR);
                let mut s = match self.config.limiter {
                    Limiter::Barth => barth_limit_components(&self.mesh, &w, k, &s, B..NVAR),
                    _ => s,
                };
                if let Some(gb) = &exact_b {
                    let g = gb(self.mesh.cells[k].centroid);
                    let eg = self.eq.as_ref().map_or(ZERO_GRADIENT, |e| e.grad[k]);
                    s[0][B] = g[0] - eg[0][B];
                    s[1][B] = g[1] - eg[1][B];
                }
                s
            })
            .collect())
    }

    fn fluctuation_predictor(&self, k: usize, w: &State, s: &Gradient) -> Result<State> {
        let eq = self.eq.as_ref().expect("equilibrium cache present");
        let cell = &self.mesh.cells[k];
        let mut div = State::ZERO;
        for f in &cell.faces {
            let e = &self.mesh.edges[f.edge];
            let side = if f.sign > 0.0 { 0 } else { 1 };
            let q = check_depth(eq.edge[f.edge][side] + *w + directional(s, f.midpoint_offset))?;
            let n = Direction::new(e.normal[0], e.normal[1]);
            div += (flux_normal(&q, n)? - eq.edge_flux[f.edge][side]) * (f.sign * e.length);
        }
        let q = check_depth(eq.slot[k] + *w)?;
        let grad = self.frame.gradient(s, &eq.grad[k]);
        Ok(freeze_static(
            div * (-1.0 / cell.area) - (ncp_apply(&q, &grad)? - eq.cell_term[k]),
        ))
    }

    fn reconstruct(&self, w: &[State], k: usize) -> Result<CellRecon> {
        let mut slope = self.dynamic_slope(w, k);
        for d in 0..2 {
            for c in B..NVAR {
                slope[d][c] = self.static_slope[k][d][c];
            }
        }
        let time_slope = match self.config.scheme {
            Scheme::WbGeneral => self.fluctuation_predictor(k, &w[k], &slope)?,
            _ => predictor_2d(&self.mesh, k, &w[k], &slope, self.config.scheme.mode())?,
        };
        Ok(CellRecon { slope, time_slope })
    }
}

impl TimeStepper for Solver2d {
    fn state(&self) -> &SimulationState {
        &self.state
    }

    fn t_end(&self) -> f64 {
        self.config.t_end
    }

    fn timestep(&self) -> Result<f64> {
        timestep_2d(&self.mesh, &self.state.averages, self.config.cfl)
            .map_err(|e| retime(e, self.state.t))
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let t = self.state.t;
        let m = &self.mesh;
        let nc = m.n_cells();
        let slots = self.slot_states(&self.state.averages)?;
        let w = self.to_w(&slots);

        let recon: Vec<CellRecon> = (0..nc)
            .into_par_iter()
            .map(|k| self.reconstruct(&w, k).map_err(|e| e.at_cell(k, t)))
            .collect::<Result<_>>()?;

        let half = 0.5 * dt;
        let frame = self.frame;
        let eq = self.eq.as_ref();
        // per edge: net flux seen from the left, from the right, half jump
        let edge_terms: Vec<[State; 3]> = m
            .edges
            .par_iter()
            .enumerate()
            .map(|(ei, e)| {
                let n = Direction::new(e.normal[0], e.normal[1]);
                let (el, er) = eq.map_or((State::ZERO, State::ZERO), |q| (q.edge[ei][0], q.edge[ei][1]));
                let l = e.left;
                let c = &m.cells[l];
                let off = [e.midpoint[0] - c.centroid[0], e.midpoint[1] - c.centroid[1]];
                let rl = &recon[l];
                let wm = w[l] + directional(&rl.slope, off) + rl.time_slope * half;
                let qm = frame.to_q(&wm, &el).map_err(|err| err.at_cell(l, t))?;
                let (wp, r) = match e.right {
                    EdgeRight::Cell { cell: r, shift } => {
                        let cr = &m.cells[r];
                        let off = [
                            e.midpoint[0] - shift[0] - cr.centroid[0],
                            e.midpoint[1] - shift[1] - cr.centroid[1],
                        ];
                        let rr = &recon[r];
                        (w[r] + directional(&rr.slope, off) + rr.time_slope * half, r)
                    }
                    EdgeRight::Boundary { ghost } => (w[nc + ghost], l),
                };
                let qp = frame.to_q(&wp, &er).map_err(|err| err.at_cell(r, t))?;
                let (f, j) = frame
                    .interface((&wm, &qm), (&wp, &qp), n)
                    .map_err(|err| err.at_cell(l, t))?;
                Ok(match eq {
                    Some(q) => [f - q.edge_flux[ei][0], f - q.edge_flux[ei][1], j],
                    None => [f, f, j],
                })
            })
            .collect::<Result<_>>()?;

        let next: Vec<State> = (0..nc)
            .into_par_iter()
            .map(|k| {
                let cell = &m.cells[k];
                let r = &recon[k];
                let mut acc = State::ZERO;
                for f in &cell.faces {
                    let e = &m.edges[f.edge];
                    let [fl, fr, j] = &edge_terms[f.edge];
                    acc += if f.sign > 0.0 { *fl + *j } else { *j - *fr } * e.length;
                }
                let mid = frame
                    .to_q(&(w[k] + r.time_slope * half), &self.eq_slot(k))
                    .map_err(|err| err.at_cell(k, t))?;
                let mut src = frame
                    .source(&mid, &r.slope, &eq.map_or(ZERO_GRADIENT, |q| q.grad[k]))
                    .map_err(|err| err.at_cell(k, t))?;
                if let Some(q) = eq {
                    src -= q.cell_term[k];
                }
                let q0 = slots[k];
                let mut q = q0;
                let scale = dt / cell.area;
                for c in 0..N_DYNAMIC {
                    q[c] = q0[c] - scale * acc[c] - dt * src[c];
                }
                check_depth(q).map_err(|err| err.at_cell(k, t + dt))
            })
            .collect::<Result<_>>()?;

        self.state.averages = next;
        self.state.step += 1;
        let t_end = self.config.t_end;
        self.state.t = if t + dt >= t_end || t_end - (t + dt) < 1e-14 * t_end {
            t_end
        } else {
            t + dt
        };
        Ok(())
    }
}
