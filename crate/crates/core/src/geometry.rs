//! Analytic metric families, covariant/contravariant conversion and the
//! embedding maps used for visualization.
//!
//! Chart coordinates are `(x, y)` on the plane and `(θ, φ)` (longitude,
//! latitude) on the sphere and on the oblate ellipsoid. The metric depends
//! only on the latitude for the curved families, and its determinant
//! vanishes at the poles `φ = ±π/2`.

use std::fmt;

use crate::error::{Error, Result};

/// Determinant floor below which a chart point is rejected as a pole.
pub const DET_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricKind {
    Cartesian,
    /// Sphere of radius `radius`.
    Spherical { radius: f64 },
    /// Oblate ellipsoid with linear eccentricity `eccentricity` and
    /// constant surface level `level` (β).
    Elliptical { eccentricity: f64, level: f64 },
}

/// One of the analytic metric families. Only used for initialization,
/// ghost cells and oracles; the solver itself reads the metric from the
/// state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub det_floor: f64,
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MetricKind::Cartesian => write!(f, "cartesian"),
            MetricKind::Spherical { radius } => write!(f, "spherical(R={radius})"),
            MetricKind::Elliptical { eccentricity, level } => {
                write!(f, "elliptical(K={eccentricity}, beta={level})")
            }
        }
    }
}

impl MetricSpec {
    pub fn cartesian() -> Self {
        MetricSpec {
            kind: MetricKind::Cartesian,
            det_floor: DET_FLOOR,
        }
    }

    pub fn spherical(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "spherical radius must be positive, got {radius}"
            )));
        }
        Ok(MetricSpec {
            kind: MetricKind::Spherical { radius },
            det_floor: DET_FLOOR,
        })
    }

    pub fn elliptical(eccentricity: f64, level: f64) -> Result<Self> {
        if !(eccentricity > 0.0 && level > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "elliptical metric needs K > 0 and beta > 0, got K={eccentricity}, beta={level}"
            )));
        }
        Ok(MetricSpec {
            kind: MetricKind::Elliptical { eccentricity, level },
            det_floor: DET_FLOOR,
        })
    }

    /// Parses `cartesian`, `spherical` or `elliptical` with the default
    /// parameters (R = 1; K = 1, β = 2).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cartesian" => Ok(Self::cartesian()),
            "spherical" => Self::spherical(1.0),
            "elliptical" => Self::elliptical(1.0, 2.0),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MetricKind::Cartesian => "cartesian",
            MetricKind::Spherical { .. } => "spherical",
            MetricKind::Elliptical { .. } => "elliptical",
        }
    }

    pub fn is_cartesian(&self) -> bool {
        matches!(self.kind, MetricKind::Cartesian)
    }

    /// Covariant metric at chart point `x`.
    pub fn eval_metric(&self, x: [f64; 2]) -> Result<CovariantMetric> {
        let g = self.eval_unchecked(x);
        let det = g.det();
        if !(det > self.det_floor) {
            return Err(Error::PoleSingularity { det });
        }
        Ok(g)
    }

    fn eval_unchecked(&self, x: [f64; 2]) -> CovariantMetric {
        let phi = x[1];
        match self.kind {
            MetricKind::Cartesian => CovariantMetric::new(1.0, 0.0, 1.0),
            MetricKind::Spherical { radius } => {
                let r2 = radius * radius;
                let c = phi.cos();
                CovariantMetric::new(r2 * c * c, 0.0, r2)
            }
            MetricKind::Elliptical { eccentricity, level } => {
                let k2 = eccentricity * eccentricity;
                let (ch, sh) = (level.cosh(), level.sinh());
                let (s, c) = phi.sin_cos();
                CovariantMetric::new(
                    k2 * ch * ch * c * c,
                    0.0,
                    k2 * (ch * ch * s * s + sh * sh * c * c),
                )
            }
        }
    }

    /// Exact chart derivatives `[∂₁(γ₁₁, γ₁₂, γ₂₂), ∂₂(γ₁₁, γ₁₂, γ₂₂)]`.
    pub fn metric_gradient(&self, x: [f64; 2]) -> [[f64; 3]; 2] {
        let phi = x[1];
        match self.kind {
            MetricKind::Cartesian => [[0.0; 3]; 2],
            MetricKind::Spherical { radius } => {
                let (s, c) = phi.sin_cos();
                [[0.0; 3], [-2.0 * radius * radius * c * s, 0.0, 0.0]]
            }
            MetricKind::Elliptical { eccentricity, level } => {
                let k2 = eccentricity * eccentricity;
                let ch = level.cosh();
                let (s, c) = phi.sin_cos();
                // d/dφ of K²(ch² sin² + sh² cos²) reduces to 2K² sin cos since ch² − sh² = 1
                [[0.0; 3], [-2.0 * k2 * ch * ch * c * s, 0.0, 2.0 * k2 * s * c]]
            }
        }
    }

    /// Embeds the chart point offset by `height` along the manifold normal.
    pub fn embed(&self, x: [f64; 2], height: f64) -> [f64; 3] {
        match self.kind {
            MetricKind::Cartesian => [x[0], x[1], height],
            MetricKind::Spherical { radius } => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                let r = radius + height;
                [r * ct * cp, r * st * cp, r * sp]
            }
            MetricKind::Elliptical { eccentricity, level } => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                let (ch, sh) = (level.cosh(), level.sinh());
                let k = eccentricity;
                let surface = [k * ch * ct * cp, k * ch * st * cp, k * sh * sp];
                // ∂/∂β of the map is normal to the β-level surface
                let normal = [k * sh * ct * cp, k * sh * st * cp, k * ch * sp];
                let len = (normal[0].powi(2) + normal[1].powi(2) + normal[2].powi(2)).sqrt();
                [
                    surface[0] + height * normal[0] / len,
                    surface[1] + height * normal[1] / len,
                    surface[2] + height * normal[2] / len,
                ]
            }
        }
    }
}

/// Covariant metric coefficients `(γ₁₁, γ₁₂, γ₂₂)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovariantMetric {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

/// Inverse metric `γ^ij` together with the determinant of `γ_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContravariantMetric {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub det: f64,
}

impl CovariantMetric {
    pub fn new(g11: f64, g12: f64, g22: f64) -> Self {
        CovariantMetric { g11, g12, g22 }
    }

    pub fn from_array(g: [f64; 3]) -> Self {
        CovariantMetric::new(g[0], g[1], g[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.g11, self.g12, self.g22]
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    fn check(&self) -> Result<f64> {
        let det = self.det();
        if !(det > DET_FLOOR) || !(self.g11 > 0.0) || !(self.g22 > 0.0) {
            return Err(Error::PoleSingularity { det });
        }
        Ok(det)
    }

    /// The 2×2 inverse `γ^ij`.
    pub fn contravariant(&self) -> Result<ContravariantMetric> {
        let det = self.check()?;
        Ok(ContravariantMetric {
            g11: self.g22 / det,
            g12: -self.g12 / det,
            g22: self.g11 / det,
            det,
        })
    }

    /// Largest eigenvalue of `γ^ij`, i.e. `max_{|n|=1} nᵀ γ^ij n`.
    pub fn max_eigen(&self) -> Result<f64> {
        let det = self.check()?;
        let disc = ((self.g11 - self.g22).powi(2) + 4.0 * self.g12 * self.g12).sqrt();
        Ok((self.g11 + self.g22 + disc) / (2.0 * det))
    }
}

impl ContravariantMetric {
    /// `nᵀ γ^ij n`.
    #[inline]
    pub fn quadratic_form(&self, n: [f64; 2]) -> f64 {
        self.g11 * n[0] * n[0] + 2.0 * self.g12 * n[0] * n[1] + self.g22 * n[1] * n[1]
    }
}

/// Free-function form of [`MetricSpec::eval_metric`].
pub fn eval_metric(spec: &MetricSpec, x: [f64; 2]) -> Result<CovariantMetric> {
    spec.eval_metric(x)
}

/// Free-function form of [`CovariantMetric::contravariant`].
pub fn contravariant(g: &CovariantMetric) -> Result<ContravariantMetric> {
    g.contravariant()
}

/// Free-function form of [`CovariantMetric::max_eigen`].
pub fn metric_max_eigen(g: &CovariantMetric) -> Result<f64> {
    g.max_eigen()
}
