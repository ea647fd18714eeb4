//! Partition-of-unity blending of vector fields.

use super::{BumpPartition, Field3, FieldError, VectorField};
use crate::geom::{mat_add, mat_scale, outer, Mat3, Vec3};
use crate::region::Box3;
use std::sync::Arc;

/// Pointwise convex combination `Σ ψᵢ·Fᵢ`; the Jacobian carries the bump
/// gradients through the product rule.
pub struct BlendedField {
    fields: Vec<Field3>,
    partition: BumpPartition,
    domain: Box3,
}

/// Blends `fields` against `partition`. `fields[0]` is the background field
/// and fixes the blend domain; `fields[1..]` pair up with the partition's
/// explicit regions and must be defined on their outer sets.
pub fn blend(fields: Vec<Field3>, partition: BumpPartition) -> Result<Arc<BlendedField>, FieldError> {
    if fields.len() != partition.len() {
        return Err(FieldError::Composition(format!(
            "{} fields against {} partition weights",
            fields.len(),
            partition.len()
        )));
    }
    let domain = fields[0].domain();
    for (k, region) in partition.regions().iter().enumerate() {
        let outer = region.outer_bounds();
        let fd = fields[k + 1].domain();
        for i in 0..3 {
            let lo_ok = fd.periodic[i] || outer.min[i].is_infinite() || fd.min[i] <= outer.min[i];
            let hi_ok = fd.periodic[i] || outer.max[i].is_infinite() || fd.max[i] >= outer.max[i];
            if !(lo_ok && hi_ok) {
                return Err(FieldError::Composition(format!(
                    "field {} does not cover its region's outer set on axis {i}",
                    k + 1
                )));
            }
        }
    }
    Ok(Arc::new(BlendedField {
        fields,
        partition,
        domain,
    }))
}

impl VectorField for BlendedField {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, p: Vec3) -> Vec3 {
        let w = self.partition.weights(p);
        let mut v = [0.0; 3];
        for (wi, f) in w.iter().zip(&self.fields) {
            if *wi != 0.0 {
                let fv = f.velocity(p);
                for i in 0..3 {
                    v[i] += wi * fv[i];
                }
            }
        }
        v
    }

    fn jacobian(&self, p: Vec3) -> Mat3 {
        let (w, g) = self.partition.weights_grads(p);
        let mut jac = [[0.0; 3]; 3];
        for ((wi, gi), f) in w.iter().zip(&g).zip(&self.fields) {
            if *wi != 0.0 || gi.iter().any(|&x| x != 0.0) {
                jac = mat_add(&jac, &mat_scale(&f.jacobian(p), *wi));
                jac = mat_add(&jac, &outer(f.velocity(p), *gi));
            }
        }
        jac
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{
        jacobian_fd_error, morse_smale_plane, suspension_field, BumpRegion, DiskSuspension,
        SpiralContraction,
    };
    use crate::geom::{dist, dot, norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn glued_one() -> Arc<BlendedField> {
        let base = suspension_field(1).unwrap();
        let part = BumpPartition::with_background(vec![
            BumpRegion::BallXY {
                center: [-0.5, 0.0],
                inner: 0.15,
                outer: 0.3,
            },
            BumpRegion::BallXY {
                center: [1.5, 0.0],
                inner: 0.15,
                outer: 0.3,
            },
        ])
        .unwrap();
        let disk = Arc::new(SpiralContraction::default());
        let fields: Vec<Field3> = vec![
            base,
            Arc::new(DiskSuspension::new([-0.5, 0.0], 0.3, disk.clone())),
            Arc::new(DiskSuspension::new([1.5, 0.0], 0.3, disk)),
        ];
        blend(fields, part).unwrap()
    }

    #[test]
    fn single_region_weight_one_reproduces_field() {
        let f = glued_one();
        // deep inside an attachment ball the blend equals the disk field
        let p = [-0.5 + 0.05, 0.02, 0.3];
        let disk = DiskSuspension::new([-0.5, 0.0], 0.3, Arc::new(SpiralContraction::default()));
        let a = f.velocity(p);
        let b = disk.velocity(p);
        assert!(dist(a, b) < 1e-14);
    }

    #[test]
    fn identical_fields_blend_to_themselves() {
        let base = morse_smale_plane(1).unwrap();
        let part = BumpPartition::with_background(vec![BumpRegion::BallXY {
            center: [0.5, 0.0],
            inner: 0.2,
            outer: 0.4,
        }])
        .unwrap();
        let f = blend(vec![base.clone(), base.clone()], part).unwrap();
        for &p in &[[0.5, 0.1, 0.0], [0.2, -0.3, 0.0], [1.4, 0.0, 0.0]] {
            assert!(dist(f.velocity(p), base.velocity(p)) < 1e-14);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let base = morse_smale_plane(1).unwrap();
        let part = BumpPartition::with_background(vec![BumpRegion::BallXY {
            center: [0.5, 0.0],
            inner: 0.2,
            outer: 0.4,
        }])
        .unwrap();
        assert!(blend(vec![base], part).is_err());
    }

    #[test]
    fn blend_matches_manual_sum_and_stays_nonvanishing() {
        let f = glued_one();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = f.domain();
        for _ in 0..10_000 {
            let p = b.sample_interior(&mut rng);
            let v = f.velocity(p);
            // all blended fields here share unit vertical speed, so the
            // blend keeps an acute angle with e_z and never vanishes
            assert!((v[2] - 1.0).abs() < 1e-12);
            assert!(norm(v) >= 1.0);
            assert!(dot(v, [0.0, 0.0, 1.0]) > 0.0);
        }
    }

    #[test]
    fn blended_jacobian_matches_finite_differences() {
        let f = glued_one();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let err = jacobian_fd_error(f.as_ref(), 1000, &mut rng);
        assert!(err <= 1e-5, "fd error {err}");
    }
}
