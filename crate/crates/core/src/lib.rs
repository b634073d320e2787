//! Finite-volume shallow water solver on manifolds described in general
//! covariant coordinates.
//!
//! The conserved state carries the covariant metric next to the physical
//! unknowns, `Q = (h, m¹, m², b, γ₁₁, γ₁₂, γ₂₂)`, so curvature enters only
//! through nonconservative products of metric gradients and is never
//! computed explicitly. The time integrator is a second-order
//! MUSCL-Hancock scheme with a path-conservative treatment of the
//! nonconservative terms, available in three flavours:
//!
//! * `standard`: conservative reconstruction and Rusanov flux,
//! * `wb_rest`: free-surface reconstruction with a modified Rusanov
//!   dissipation, exactly preserving water at rest on any metric and over
//!   discontinuous bathymetry,
//! * `wb_general`: fluctuation reconstruction around a supplied equilibrium.

// `!(x > y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod mesh;
pub mod metrics_io;
pub mod physics;
pub mod reconstruction;
pub mod scenarios;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use geometry::{CovariantMetric, MetricKind, MetricSpec};
pub use mesh::{Mesh1D, PolyMesh};
pub use state::{Direction, Gradient, State};

/// Gravitational acceleration used throughout.
pub const GRAVITY: f64 = 9.81;
