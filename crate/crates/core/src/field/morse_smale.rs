//! Morse–Smale base flows, their suspensions, and the attachable disk flows.
//!
//! The planar flow has sinks at `x = 2i - 1/2` (k+1 of them on the box) and
//! saddles at `x = 2i + 1/2` (k of them), columns of the suspension after
//! adding the periodic third coordinate. The spatial variant has its
//! equilibria at `x = 40i ∓ 5` with a contracting x-rate inside (-1, 0) at
//! the `40i-5` family, so those classify as Lorenz-like.

use super::{FieldError, VectorField};
use crate::geom::{Mat3, Vec3};
use crate::region::Box3;
use std::f64::consts::PI;
use std::sync::Arc;

fn check_k(k: u32) -> Result<(), FieldError> {
    if k < 1 {
        return Err(FieldError::Parameter("k must be >= 1".into()));
    }
    Ok(())
}

/// x-profile of the planar flow: descent of sin(πx), so the sinks sit at
/// the half-odd-integers 2i - 1/2.
#[inline]
fn plane_profile(x: f64) -> (f64, f64) {
    (-PI * (PI * x).cos(), PI * PI * (PI * x).sin())
}

/// Planar Morse–Smale flow `(−π cos(πx), −y, 0)` on `[−1, 2k]×[−1,1]`,
/// extended constantly in z.
pub struct PlanarMorseSmale {
    domain: Box3,
}

pub fn morse_smale_plane(k: u32) -> Result<Arc<PlanarMorseSmale>, FieldError> {
    check_k(k)?;
    Ok(Arc::new(PlanarMorseSmale {
        domain: Box3::new([-1.0, -1.0, -1.0], [2.0 * k as f64, 1.0, 1.0]),
    }))
}

impl VectorField for PlanarMorseSmale {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, [x, y, _]: Vec3) -> Vec3 {
        [plane_profile(x).0, -y, 0.0]
    }

    fn jacobian(&self, [x, _, _]: Vec3) -> Mat3 {
        [
            [plane_profile(x).1, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0],
        ]
    }
}

/// Solid-torus suspension `(−π cos(πx), −y, 1)` with z taken mod 1.
/// The third component never vanishes, so the field has no equilibria;
/// sink columns of the planar flow become attracting periodic orbits.
pub struct SuspensionField {
    domain: Box3,
}

pub fn suspension_field(k: u32) -> Result<Arc<SuspensionField>, FieldError> {
    check_k(k)?;
    Ok(Arc::new(SuspensionField {
        domain: Box3::new([-1.0, -1.0, 0.0], [2.0 * k as f64, 1.0, 1.0]).with_periodic(2),
    }))
}

impl VectorField for SuspensionField {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, [x, y, _]: Vec3) -> Vec3 {
        [plane_profile(x).0, -y, 1.0]
    }

    fn jacobian(&self, [x, _, _]: Vec3) -> Mat3 {
        [
            [plane_profile(x).1, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0],
        ]
    }
}

/// x-profile of the spatial base flow: zeros exactly at u = 2n ± 1/4
/// (x = 40n ± 5 after the x/20 rescale), contracting at the left family.
#[inline]
fn space_profile(u: f64) -> (f64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (s - (PI * u).cos(), PI * (PI * u).sin())
}

/// Spatial Morse–Smale flow `(h(x/20), y, −z)` on `[−10, 40k]×[−5,5]²`,
/// with k+1 index-2 saddles at x = 40i−5 and k index-1 saddles at 40i+5.
pub struct SpatialMorseSmale {
    domain: Box3,
}

pub fn morse_smale_space(k: u32) -> Result<Arc<SpatialMorseSmale>, FieldError> {
    check_k(k)?;
    Ok(Arc::new(SpatialMorseSmale {
        domain: Box3::new([-10.0, -5.0, -5.0], [40.0 * k as f64, 5.0, 5.0]),
    }))
}

impl VectorField for SpatialMorseSmale {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, [x, y, z]: Vec3) -> Vec3 {
        [space_profile(x / 20.0).0, y, -z]
    }

    fn jacobian(&self, [x, _, _]: Vec3) -> Mat3 {
        [
            [space_profile(x / 20.0).1 / 20.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, -1.0],
        ]
    }
}

/// Flow on the unit disk that the glued suspensions attach at each sink.
/// The default surrogate contracts to the disk center with a rotation,
/// which becomes an attracting periodic orbit after suspension; a
/// Plykin-type flow can be plugged in through this trait.
pub trait DiskFlow: Send + Sync {
    /// Planar velocity at disk coordinates `u` (defined for |u| ≤ 2, since
    /// the blend support extends to twice the rescale radius).
    fn velocity(&self, u: [f64; 2]) -> [f64; 2];
    /// Planar Jacobian at `u`.
    fn jacobian(&self, u: [f64; 2]) -> [[f64; 2]; 2];
}

/// `u̇ = −κ u + ω u⊥`: spiral contraction to the disk center.
pub struct SpiralContraction {
    pub rate: f64,
    pub rotation: f64,
}

impl Default for SpiralContraction {
    fn default() -> Self {
        Self {
            rate: 2.0,
            rotation: 1.0,
        }
    }
}

impl DiskFlow for SpiralContraction {
    fn velocity(&self, [u, v]: [f64; 2]) -> [f64; 2] {
        [-self.rate * u - self.rotation * v, -self.rate * v + self.rotation * u]
    }

    fn jacobian(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
        [[-self.rate, -self.rotation], [self.rotation, -self.rate]]
    }
}

/// Pushforward of a [`DiskFlow`] suspension under `u ↦ center + (ε/2)·u`,
/// with unit vertical speed. This is the field that gets blended over each
/// attachment ball.
pub struct DiskSuspension {
    pub center: [f64; 2],
    pub half_radius: f64,
    pub disk: Arc<dyn DiskFlow>,
    domain: Box3,
}

impl DiskSuspension {
    pub fn new(center: [f64; 2], attach_radius: f64, disk: Arc<dyn DiskFlow>) -> Self {
        let r = attach_radius;
        let domain = Box3::new(
            [center[0] - r, center[1] - r, 0.0],
            [center[0] + r, center[1] + r, 1.0],
        )
        .with_periodic(2);
        Self {
            center,
            half_radius: attach_radius / 2.0,
            disk,
            domain,
        }
    }
}

impl VectorField for DiskSuspension {
    fn domain(&self) -> Box3 {
        self.domain
    }

    fn velocity(&self, [x, y, _]: Vec3) -> Vec3 {
        let s = self.half_radius;
        let u = [(x - self.center[0]) / s, (y - self.center[1]) / s];
        let w = self.disk.velocity(u);
        [s * w[0], s * w[1], 1.0]
    }

    fn jacobian(&self, [x, y, _]: Vec3) -> Mat3 {
        let s = self.half_radius;
        let u = [(x - self.center[0]) / s, (y - self.center[1]) / s];
        // d/dp [s·w(u(p))] = s·Dw·(1/s) = Dw
        let j = self.disk.jacobian(u);
        [
            [j[0][0], j[0][1], 0.0],
            [j[1][0], j[1][1], 0.0],
            [0.0, 0.0, 0.0],
        ]
    }
}
