//! The seven-component conserved state and small vector helpers.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Number of conserved variables.
pub const NVAR: usize = 7;

pub const H: usize = 0;
pub const M1: usize = 1;
pub const M2: usize = 2;
pub const B: usize = 3;
pub const G11: usize = 4;
pub const G12: usize = 5;
pub const G22: usize = 6;

/// Number of variables evolved in time; the rest (bathymetry and metric)
/// are stationary.
pub const N_DYNAMIC: usize = 3;

/// Conserved state `(h, m¹, m², b, γ₁₁, γ₁₂, γ₂₂)`.
///
/// The same container doubles as a generic 7-vector for fluxes, slopes and
/// increments, so arithmetic is component-wise.
/// Depth `h ≈ η − b` such that `h + b` rounds back to `η` exactly, when a
/// float within a few ulps of `η − b` allows it. Keeps a flat free surface
/// bitwise flat over an arbitrary bathymetry.
pub fn depth_below(eta: f64, b: f64) -> f64 {
    let h = eta - b;
    if h + b == eta {
        return h;
    }
    let (mut lo, mut hi) = (h, h);
    for _ in 0..4 {
        lo = lo.next_down();
        hi = hi.next_up();
        if lo + b == eta {
            return lo;
        }
        if hi + b == eta {
            return hi;
        }
    }
    h
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct State(pub [f64; NVAR]);

/// Spatial gradient `(∂₁Q, ∂₂Q)`.
pub type Gradient = [State; 2];

pub const ZERO_GRADIENT: Gradient = [State::ZERO, State::ZERO];

impl State {
    pub const ZERO: State = State([0.0; NVAR]);

    #[allow(clippy::too_many_arguments)]
    pub fn new(h: f64, m1: f64, m2: f64, b: f64, g11: f64, g12: f64, g22: f64) -> Self {
        State([h, m1, m2, b, g11, g12, g22])
    }

    /// Water at rest over bathymetry `b` with free surface `eta`.
    pub fn at_rest(eta: f64, b: f64, metric: [f64; 3]) -> Self {
        State([depth_below(eta, b), 0.0, 0.0, b, metric[0], metric[1], metric[2]])
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.0[H]
    }
    #[inline]
    pub fn m1(&self) -> f64 {
        self.0[M1]
    }
    #[inline]
    pub fn m2(&self) -> f64 {
        self.0[M2]
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.0[B]
    }
    #[inline]
    pub fn eta(&self) -> f64 {
        self.0[H] + self.0[B]
    }
    #[inline]
    pub fn metric(&self) -> [f64; 3] {
        [self.0[G11], self.0[G12], self.0[G22]]
    }

    /// Contravariant velocity `u^i = m^i / h`.
    #[inline]
    pub fn velocity(&self) -> [f64; 2] {
        [self.0[M1] / self.0[H], self.0[M2] / self.0[H]]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for State {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for State {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for State {
    type Output = State;
    #[inline]
    fn add(mut self, rhs: State) -> State {
        self += rhs;
        self
    }
}

impl AddAssign for State {
    #[inline]
    fn add_assign(&mut self, rhs: State) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for State {
    type Output = State;
    #[inline]
    fn sub(mut self, rhs: State) -> State {
        self -= rhs;
        self
    }
}

impl SubAssign for State {
    #[inline]
    fn sub_assign(&mut self, rhs: State) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<f64> for State {
    type Output = State;
    #[inline]
    fn mul(mut self, s: f64) -> State {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Mul<State> for f64 {
    type Output = State;
    #[inline]
    fn mul(self, q: State) -> State {
        q * self
    }
}

impl Neg for State {
    type Output = State;
    #[inline]
    fn neg(self) -> State {
        self * -1.0
    }
}

/// A direction in chart coordinates, expected to have unit Euclidean norm.
///
/// The metric re-measures its physical length; see
/// [`crate::physics::eigenvalues`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub n1: f64,
    pub n2: f64,
}

impl Direction {
    pub fn new(n1: f64, n2: f64) -> Self {
        Direction { n1, n2 }
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: [f64; 2]) -> Self {
        let len = v[0].hypot(v[1]);
        Direction {
            n1: v[0] / len,
            n2: v[1] / len,
        }
    }

    /// Unit vector along chart axis `axis` (0 or 1).
    pub fn axis(axis: usize) -> Self {
        if axis == 0 {
            Direction::new(1.0, 0.0)
        } else {
            Direction::new(0.0, 1.0)
        }
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 2] {
        [self.n1, self.n2]
    }

    #[inline]
    pub fn reversed(&self) -> Self {
        Direction::new(-self.n1, -self.n2)
    }
}

/// `grad · dx` for a linear reconstruction.
#[inline]
pub fn directional(grad: &Gradient, dx: [f64; 2]) -> State {
    let mut out = State::ZERO;
    for i in 0..NVAR {
        out.0[i] = grad[0].0[i] * dx[0] + grad[1].0[i] * dx[1];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_state_has_requested_free_surface() {
        let q = State::at_rest(3.0, 1.0, [1.0, 0.0, 1.0]);
        assert_eq!(q.h(), 2.0);
        assert_eq!(q.eta(), 3.0);
        assert_eq!(q.velocity(), [0.0, 0.0]);
    }

    #[test]
    fn arithmetic_is_componentwise() {
        let a = State::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0);
        let b = State([1.0; NVAR]);
        assert_eq!((a - b).0, [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!((2.0 * a).0[6], 14.0);
        assert_eq!((-a).0[0], -1.0);
    }

    #[test]
    fn directional_derivative_contracts_both_axes() {
        let grad = [State([1.0; NVAR]), State([2.0; NVAR])];
        assert_eq!(directional(&grad, [0.5, 0.25]).0, [1.0; NVAR]);
    }
}
