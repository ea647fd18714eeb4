//! Inward-pointing tubular field carrying orbits through connecting tubes.

use super::{FieldError, VectorField};
use crate::geom::{Mat3, Vec3};
use crate::region::Box3;
use std::sync::Arc;

/// One-dimensional C² potential with φ(0)=φ(1)=0 and φ<0 on (0,1).
#[derive(Clone)]
pub struct PotentialProfile {
    phi: fn(f64) -> f64,
    dphi: fn(f64) -> f64,
    d2phi: fn(f64) -> f64,
}

impl PotentialProfile {
    pub fn new(
        phi: fn(f64) -> f64,
        dphi: fn(f64) -> f64,
        d2phi: fn(f64) -> f64,
    ) -> Result<Self, FieldError> {
        if phi(0.0) != 0.0 || phi(1.0) != 0.0 {
            return Err(FieldError::Parameter(
                "potential must vanish exactly at 0 and 1".into(),
            ));
        }
        let min = (1..1000)
            .map(|i| phi(i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        if min >= 0.0 {
            return Err(FieldError::Parameter(
                "potential must be negative on (0,1)".into(),
            ));
        }
        Ok(Self { phi, dphi, d2phi })
    }

    /// Default well φ(u) = −u²(1−u)², with φ'(0)=φ'(1)=0.
    pub fn default_well() -> Self {
        Self {
            phi: |u| -u * u * (1.0 - u) * (1.0 - u),
            dphi: |u| -2.0 * u * (1.0 - u) * (1.0 - 2.0 * u),
            d2phi: |u| -2.0 * (6.0 * u * u - 6.0 * u + 1.0),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        (self.phi)(u)
    }

    pub fn deriv(&self, u: f64) -> f64 {
        (self.dphi)(u)
    }

    pub fn second(&self, u: f64) -> f64 {
        (self.d2phi)(u)
    }
}

/// Velocity `(∇φ(40(x²+y²) − 1/2), 1)` in cylinder coordinates: the planar
/// gradient of the composite (x,y) ↦ φ(40(x²+y²) − 1/2), with unit axial
/// speed. The domain box is inscribed in the unit disk so evaluation is
/// total on it; [`TubeField::velocity_checked`] errors outside the cylinder.
pub struct TubeField {
    profile: PotentialProfile,
    domain: Box3,
}

pub fn tube_field(axis_len: f64, profile: PotentialProfile) -> Result<Arc<TubeField>, FieldError> {
    if !(axis_len > 0.0) {
        return Err(FieldError::Parameter("axis_len must be positive".into()));
    }
    Ok(Arc::new(TubeField {
        profile,
        domain: Box3::new([-0.7, -0.7, 0.0], [0.7, 0.7, axis_len]),
    }))
}

impl TubeField {
    fn arg(x: f64, y: f64) -> f64 {
        40.0 * (x * x + y * y) - 0.5
    }

    pub fn velocity_checked(&self, p: Vec3) -> Result<Vec3, FieldError> {
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 > 1.0 || p[2] < 0.0 || p[2] > self.domain.max[2] {
            return Err(FieldError::Domain(p));
        }
        Ok(self.velocity(p))
    }
}

impl VectorField for TubeField {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, [x, y, _]: Vec3) -> Vec3 {
        let g = self.profile.deriv(Self::arg(x, y)) * 80.0;
        [g * x, g * y, 1.0]
    }

    fn jacobian(&self, [x, y, _]: Vec3) -> Mat3 {
        let w = Self::arg(x, y);
        let d1 = self.profile.deriv(w);
        let d2 = self.profile.second(w);
        // ∂/∂x [80 d1 x] = 80 d1 + 6400 d2 x², cross terms 6400 d2 xy
        [
            [
                80.0 * d1 + 6400.0 * d2 * x * x,
                6400.0 * d2 * x * y,
                0.0,
            ],
            [
                6400.0 * d2 * x * y,
                80.0 * d1 + 6400.0 * d2 * y * y,
                0.0,
            ],
            [0.0, 0.0, 0.0],
        ]
    }
}
