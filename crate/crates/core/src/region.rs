//! Axis-aligned boxes and the trapping-region descriptors used by the zoo.

use crate::geom::{dist, Vec3};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Axis-aligned box, optionally periodic along some axes (periodic axes are
/// never treated as a boundary: containment ignores them and boundary
/// sampling skips their faces).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub min: Vec3,
    pub max: Vec3,
    #[serde(default)]
    pub periodic: [bool; 3],
}

impl Box3 {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        assert!(
            (0..3).all(|i| min[i] < max[i]),
            "degenerate box {min:?}..{max:?}"
        );
        Self {
            min,
            max,
            periodic: [false; 3],
        }
    }

    pub fn with_periodic(mut self, axis: usize) -> Self {
        self.periodic[axis] = true;
        self
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| self.periodic[i] || (p[i] >= self.min[i] && p[i] <= self.max[i]))
    }

    pub fn edge(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn diameter(&self) -> f64 {
        let d = [self.edge(0), self.edge(1), self.edge(2)];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn center(&self) -> Vec3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    pub fn min_edge(&self) -> f64 {
        self.edge(0).min(self.edge(1)).min(self.edge(2))
    }

    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> Vec3 {
        let mut p = [0.0; 3];
        for i in 0..3 {
            p[i] = rng.gen_range(self.min[i]..self.max[i]);
        }
        p
    }

    /// Wraps periodic coordinates into `[min, max)`.
    pub fn wrap(&self, mut p: Vec3) -> Vec3 {
        for i in 0..3 {
            if self.periodic[i] {
                let len = self.edge(i);
                p[i] = self.min[i] + (p[i] - self.min[i]).rem_euclid(len);
            }
        }
        p
    }

    fn face_area(&self, axis: usize) -> f64 {
        let others: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
        self.edge(others[0]) * self.edge(others[1])
    }
}

/// Region descriptor for trapping regions and attractor-membership tests.
///
/// `Cylinder` is an axis-aligned solid circular cylinder: `axis` is the long
/// direction, `center` the circle center in the two transverse coordinates
/// (in increasing axis order), `span` the extent along `axis`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Region {
    Box(Box3),
    Cylinder {
        axis: usize,
        center: [f64; 2],
        radius: f64,
        span: [f64; 2],
    },
    Union(Vec<Region>),
    /// `base` minus the interiors of `holes`. Boundary sampling covers the
    /// base boundary only; the holes are membership carve-outs (used for the
    /// bitorus-style region that excludes the Lorenz wing equilibria).
    Difference {
        base: Box<Region>,
        holes: Vec<Box3>,
    },
}

impl Region {
    pub fn contains(&self, p: Vec3) -> bool {
        match self {
            Region::Box(b) => b.contains(p),
            Region::Cylinder {
                axis,
                center,
                radius,
                span,
            } => {
                let (u, v) = transverse(*axis, p);
                let du = u - center[0];
                let dv = v - center[1];
                p[*axis] >= span[0]
                    && p[*axis] <= span[1]
                    && du * du + dv * dv <= radius * radius
            }
            Region::Union(parts) => parts.iter().any(|r| r.contains(p)),
            Region::Difference { base, holes } => {
                base.contains(p) && !holes.iter().any(|h| h.contains(p))
            }
        }
    }

    /// Membership with a relative fattening of `margin` (fraction of the
    /// region's scale), used when an orbit is allowed to graze the boundary.
    pub fn contains_fattened(&self, p: Vec3, margin: f64) -> bool {
        match self {
            Region::Box(b) => {
                let mut bb = *b;
                for i in 0..3 {
                    let pad = margin * b.edge(i);
                    bb.min[i] -= pad;
                    bb.max[i] += pad;
                }
                bb.contains(p)
            }
            Region::Cylinder {
                axis,
                center,
                radius,
                span,
            } => {
                let pad_r = margin * radius;
                let pad_a = margin * (span[1] - span[0]);
                let (u, v) = transverse(*axis, p);
                let du = u - center[0];
                let dv = v - center[1];
                p[*axis] >= span[0] - pad_a
                    && p[*axis] <= span[1] + pad_a
                    && du * du + dv * dv <= (radius + pad_r) * (radius + pad_r)
            }
            Region::Union(parts) => parts.iter().any(|r| r.contains_fattened(p, margin)),
            Region::Difference { base, .. } => base.contains_fattened(p, margin),
        }
    }

    pub fn bounding_box(&self) -> Box3 {
        match self {
            Region::Box(b) => *b,
            Region::Cylinder {
                axis,
                center,
                radius,
                span,
            } => {
                let mut min = [0.0; 3];
                let mut max = [0.0; 3];
                min[*axis] = span[0];
                max[*axis] = span[1];
                let others: Vec<usize> = (0..3).filter(|&i| i != *axis).collect();
                for (k, &ax) in others.iter().enumerate() {
                    min[ax] = center[k] - radius;
                    max[ax] = center[k] + radius;
                }
                Box3::new(min, max)
            }
            Region::Union(parts) => {
                let mut bb = parts[0].bounding_box();
                for r in &parts[1..] {
                    let b = r.bounding_box();
                    for i in 0..3 {
                        bb.min[i] = bb.min[i].min(b.min[i]);
                        bb.max[i] = bb.max[i].max(b.max[i]);
                    }
                }
                bb.periodic = [false; 3];
                bb
            }
            Region::Difference { base, .. } => base.bounding_box(),
        }
    }

    /// Samples `n` points on the region boundary together with outward unit
    /// normals, area-weighted across faces/surfaces.
    pub fn sample_boundary<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<(Vec3, Vec3)> {
        let mut out = Vec::with_capacity(n);
        match self {
            Region::Box(b) => {
                let mut faces = Vec::new();
                for axis in 0..3 {
                    if b.periodic[axis] {
                        continue;
                    }
                    faces.push((axis, -1.0, b.face_area(axis)));
                    faces.push((axis, 1.0, b.face_area(axis)));
                }
                let total: f64 = faces.iter().map(|f| f.2).sum();
                for _ in 0..n {
                    let mut pick = rng.gen_range(0.0..total);
                    let &(axis, side, _) = faces
                        .iter()
                        .find(|f| {
                            pick -= f.2;
                            pick <= 0.0
                        })
                        .unwrap_or(faces.last().unwrap());
                    let mut p = b.sample_interior(rng);
                    p[axis] = if side < 0.0 { b.min[axis] } else { b.max[axis] };
                    let mut nrm = [0.0; 3];
                    nrm[axis] = side;
                    out.push((p, nrm));
                }
            }
            Region::Cylinder {
                axis,
                center,
                radius,
                span,
            } => {
                use std::f64::consts::PI;
                let len = span[1] - span[0];
                let lateral = 2.0 * PI * radius * len;
                let caps = 2.0 * PI * radius * radius;
                let others: Vec<usize> = (0..3).filter(|&i| i != *axis).collect();
                for _ in 0..n {
                    let mut p = [0.0; 3];
                    let mut nrm = [0.0; 3];
                    if rng.gen_range(0.0..lateral + caps) < lateral {
                        let theta = rng.gen_range(0.0..2.0 * PI);
                        p[*axis] = rng.gen_range(span[0]..span[1]);
                        p[others[0]] = center[0] + radius * theta.cos();
                        p[others[1]] = center[1] + radius * theta.sin();
                        nrm[others[0]] = theta.cos();
                        nrm[others[1]] = theta.sin();
                    } else {
                        // uniform over a disk cap
                        let r = radius * rng.gen_range(0.0_f64..1.0).sqrt();
                        let theta = rng.gen_range(0.0..2.0 * PI);
                        let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        p[*axis] = if side > 0.0 { span[1] } else { span[0] };
                        p[others[0]] = center[0] + r * theta.cos();
                        p[others[1]] = center[1] + r * theta.sin();
                        nrm[*axis] = side;
                    }
                    out.push((p, nrm));
                }
            }
            Region::Union(parts) => {
                // area-weighting across parts is approximated by their counts;
                // union parts in the zoo are disjoint
                let per = (n / parts.len()).max(1);
                for r in parts {
                    out.extend(r.sample_boundary(per, rng));
                }
            }
            Region::Difference { base, .. } => {
                out = base.sample_boundary(n, rng);
            }
        }
        out
    }

    /// Candidate grid spanning the region (points inside it), roughly
    /// `spacing` apart, clamped to `max_per_axis` per axis.
    pub fn grid_inside(&self, spacing: f64, max_per_axis: usize) -> Vec<Vec3> {
        let bb = self.bounding_box();
        let mut counts = [0usize; 3];
        for i in 0..3 {
            counts[i] = ((bb.edge(i) / spacing).ceil() as usize).clamp(2, max_per_axis);
        }
        let mut pts = Vec::new();
        for ix in 0..counts[0] {
            for iy in 0..counts[1] {
                for iz in 0..counts[2] {
                    let f = |k: usize, i: usize| {
                        bb.min[k] + (i as f64 + 0.5) / counts[k] as f64 * bb.edge(k)
                    };
                    let p = [f(0, ix), f(1, iy), f(2, iz)];
                    if self.contains(p) {
                        pts.push(p);
                    }
                }
            }
        }
        pts
    }
}

fn transverse(axis: usize, p: Vec3) -> (f64, f64) {
    match axis {
        0 => (p[1], p[2]),
        1 => (p[0], p[2]),
        _ => (p[0], p[1]),
    }
}

/// Minimum distance from `p` to any of `points` (used by ε-graph checks).
pub fn min_dist(p: Vec3, points: &[Vec3]) -> f64 {
    points
        .iter()
        .map(|&q| dist(p, q))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn cylinder_membership_and_boundary() {
        let r = Region::Cylinder {
            axis: 0,
            center: [0.0, 28.0],
            radius: 29.5,
            span: [-29.8, 29.8],
        };
        assert!(r.contains([0.0, 0.0, 28.0]));
        assert!(!r.contains([0.0, 0.0, 60.0]));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, nrm) in r.sample_boundary(500, &mut rng) {
            assert!(r.contains_fattened(p, 1e-9));
            let eps = 1e-6;
            let outside = [p[0] + eps * nrm[0], p[1] + eps * nrm[1], p[2] + eps * nrm[2]];
            assert!(!r.contains(outside), "normal must point outward at {p:?}");
        }
    }

    #[test]
    fn periodic_box_skips_faces() {
        let b = Box3::new([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]).with_periodic(2);
        assert!(b.contains([0.5, 0.5, 42.0]));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for (_, nrm) in Region::Box(b).sample_boundary(200, &mut rng) {
            assert_eq!(nrm[2], 0.0);
        }
        let w = b.wrap([0.5, 0.5, 2.25]);
        assert!((w[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn difference_carves_holes() {
        let base = Region::Box(Box3::new([-2.0; 3], [2.0; 3]));
        let r = Region::Difference {
            base: Box::new(base),
            holes: vec![Box3::new([-0.5; 3], [0.5; 3])],
        };
        assert!(!r.contains([0.0; 3]));
        assert!(r.contains([1.0, 1.0, 1.0]));
    }
}
