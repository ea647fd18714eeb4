//! Smooth 3-D vector fields on boxes, with analytic Jacobians.
//!
//! Every model flow in the zoo is a [`VectorField`]: the Lorenz system, the
//! Morse–Smale base flows, the suspension solid-torus field, the inward
//! tube field, and partition-of-unity blends of all of these. Fields are
//! immutable after construction and safe to evaluate from many threads.

mod blend;
mod bump;
mod linear;
mod lorenz;
mod morse_smale;
mod tube;

pub use blend::{blend, BlendedField};
pub use bump::{quintic_smoothstep, BumpPartition, BumpRegion};
pub use linear::{LinearField, OffsetField, ReversedField};
pub use lorenz::{lorenz_classic, LorenzField, LorenzParams};
pub use morse_smale::{
    morse_smale_plane, morse_smale_space, suspension_field, DiskFlow, DiskSuspension,
    SpiralContraction,
};
pub use tube::{tube_field, PotentialProfile, TubeField};

use crate::geom::{Mat3, Vec3};
use crate::region::Box3;
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

pub trait VectorField: Send + Sync {
    fn domain(&self) -> Box3;
    fn velocity(&self, p: Vec3) -> Vec3;
    fn jacobian(&self, p: Vec3) -> Mat3;
}

/// Shared-ownership handle used everywhere a field is stored.
pub type Field3 = Arc<dyn VectorField>;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("field composition error: {0}")]
    Composition(String),
    #[error("evaluation outside the field domain at {0:?}")]
    Domain(Vec3),
}

/// Typical velocity magnitude over the domain; used to scale residual
/// tolerances in root finding.
pub fn velocity_scale<R: Rng>(field: &dyn VectorField, rng: &mut R) -> f64 {
    let b = field.domain();
    let mut s = 0.0_f64;
    for _ in 0..256 {
        let p = b.sample_interior(rng);
        s = s.max(crate::geom::norm(field.velocity(p)));
    }
    s.max(1e-12)
}

/// Worst relative deviation between the analytic Jacobian and a central
/// finite difference of the velocity over `n` random interior points.
/// The step is `1e-5` of the box diameter and each entry is compared
/// relative to the Jacobian's largest magnitude (floored at 1).
pub fn jacobian_fd_error<R: Rng>(field: &dyn VectorField, n: usize, rng: &mut R) -> f64 {
    let b = field.domain();
    let h = 1e-5 * b.diameter();
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let mut p = b.sample_interior(rng);
        // keep the stencil inside the closed box
        for i in 0..3 {
            if !b.periodic[i] {
                p[i] = p[i].clamp(b.min[i] + h, b.max[i] - h);
            }
        }
        let jac = field.jacobian(p);
        let denom = crate::geom::mat_max_abs(&jac).max(1.0);
        for j in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[j] += h;
            pm[j] -= h;
            let fp = field.velocity(pp);
            let fm = field.velocity(pm);
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                worst = worst.max((fd - jac[i][j]).abs() / denom);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// All analytic fields must agree with finite differences to 1e-5.
    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let fields: Vec<(&str, Field3)> = vec![
            (
                "lorenz",
                lorenz_classic(LorenzParams::new(10.0, 8.0 / 3.0, 28.0).unwrap()),
            ),
            ("ms_plane", morse_smale_plane(2).unwrap()),
            ("suspension", suspension_field(1).unwrap()),
            ("ms_space", morse_smale_space(2).unwrap()),
            (
                "tube",
                tube_field(1.0, PotentialProfile::default_well()).unwrap(),
            ),
        ];
        for (name, f) in fields {
            let err = jacobian_fd_error(f.as_ref(), 1000, &mut rng);
            assert!(err <= 1e-5, "{name}: fd error {err}");
        }
    }
}
