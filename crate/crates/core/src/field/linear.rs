//! Linear fields and simple field combinators (translation, time reversal).

use super::VectorField;
use crate::geom::{mat_vec, sub, Mat3, Vec3};
use crate::region::Box3;
use std::sync::Arc;

/// `ẋ = A·x`, used as the saddle-passage oracle and in integrator tests.
pub struct LinearField {
    matrix: Mat3,
    domain: Box3,
}

impl LinearField {
    pub fn new(matrix: Mat3, domain: Box3) -> Self {
        Self { matrix, domain }
    }

    pub fn diagonal(rates: Vec3, domain: Box3) -> Self {
        Self::new(crate::geom::diag(rates), domain)
    }
}

impl VectorField for LinearField {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, p: Vec3) -> Vec3 {
        mat_vec(&self.matrix, p)
    }

    fn jacobian(&self, _p: Vec3) -> Mat3 {
        self.matrix
    }
}

/// Inner field translated to live around `offset` (state `p` is evaluated
/// as `p - offset`). Used by the disjoint two-copies fixture.
pub struct OffsetField {
    inner: Arc<dyn VectorField>,
    offset: Vec3,
}

impl OffsetField {
    pub fn new(inner: Arc<dyn VectorField>, offset: Vec3) -> Self {
        Self { inner, offset }
    }
}

impl VectorField for OffsetField {
    fn domain(&self) -> Box3 {
        let b = self.inner.domain();
        Box3 {
            min: crate::geom::add(b.min, self.offset),
            max: crate::geom::add(b.max, self.offset),
            periodic: b.periodic,
        }
    }

    fn velocity(&self, p: Vec3) -> Vec3 {
        self.inner.velocity(sub(p, self.offset))
    }

    fn jacobian(&self, p: Vec3) -> Mat3 {
        self.inner.jacobian(sub(p, self.offset))
    }
}

/// Time-reversed field `-F`, for backward-persistence tests.
pub struct ReversedField(pub Arc<dyn VectorField>);

impl VectorField for ReversedField {
    fn domain(&self) -> Box3 {
        self.0.domain()
    }

    fn velocity(&self, p: Vec3) -> Vec3 {
        crate::geom::scale(self.0.velocity(p), -1.0)
    }

    fn jacobian(&self, p: Vec3) -> Mat3 {
        crate::geom::mat_scale(&self.0.jacobian(p), -1.0)
    }
}
