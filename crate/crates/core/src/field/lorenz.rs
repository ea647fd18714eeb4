//! The classical Lorenz system.

use super::{FieldError, VectorField};
use crate::geom::{Mat3, Vec3};
use crate::region::Box3;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

impl LorenzParams {
    pub fn new(a: f64, b: f64, r: f64) -> Result<Self, FieldError> {
        if !(a > 0.0 && b > 0.0 && r > 0.0) {
            return Err(FieldError::Parameter(format!(
                "Lorenz coefficients must be positive, got a={a}, b={b}, r={r}"
            )));
        }
        Ok(Self { a, b, r })
    }

    pub fn classic() -> Self {
        Self {
            a: 10.0,
            b: 8.0 / 3.0,
            r: 28.0,
        }
    }
}

pub struct LorenzField {
    p: LorenzParams,
    domain: Box3,
}

impl LorenzField {
    pub fn params(&self) -> LorenzParams {
        self.p
    }
}

/// `(a(y−x), rx−y−xz, xy−bz)` on a box large enough to hold the invariant
/// cylinder `y²+(z−28)² ≤ 29.5²`, `|x| ≤ 29.8` used as the trapping region.
pub fn lorenz_classic(p: LorenzParams) -> Arc<LorenzField> {
    Arc::new(LorenzField {
        p,
        domain: Box3::new([-32.0, -32.0, -6.0], [32.0, 32.0, 62.0]),
    })
}

impl VectorField for LorenzField {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, [x, y, z]: Vec3) -> Vec3 {
        let LorenzParams { a, b, r } = self.p;
        [a * (y - x), r * x - y - x * z, x * y - b * z]
    }

    fn jacobian(&self, [x, y, z]: Vec3) -> Mat3 {
        let LorenzParams { a, b, r } = self.p;
        [[-a, a, 0.0], [r - z, -1.0, -x], [y, x, -b]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_equilibrium() {
        let f = lorenz_classic(LorenzParams::classic());
        assert_eq!(f.velocity([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        let g = lorenz_classic(LorenzParams::new(3.0, 1.0, 0.5).unwrap());
        assert_eq!(g.velocity([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn classic_at_unit_point() {
        // direct substitution: (0, 26, -5/3)
        let f = lorenz_classic(LorenzParams::classic());
        let v = f.velocity([1.0, 1.0, 1.0]);
        assert!((v[0] - 0.0).abs() < 1e-14);
        assert!((v[1] - 26.0).abs() < 1e-14);
        assert!((v[2] + 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LorenzParams::new(-1.0, 8.0 / 3.0, 28.0).is_err());
        assert!(LorenzParams::new(10.0, 0.0, 28.0).is_err());
    }
}
