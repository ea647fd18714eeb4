//! C² bump partitions of unity built from the quintic smoothstep ramp.

use super::FieldError;
use crate::geom::Vec3;
use crate::region::Box3;

/// Quintic smoothstep `6t⁵ − 15t⁴ + 10t³` and its derivative, clamped to
/// `[0,1]`; C² at both ends.
pub fn quintic_smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let t2 = t * t;
        (
            t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
            30.0 * t2 * (1.0 - t) * (1.0 - t),
        )
    }
}

/// Open-cover descriptor with an inner set (weight ≡ 1) and an outer set
/// (weight ≡ 0 outside).
#[derive(Debug, Clone)]
pub enum BumpRegion {
    /// Vertical cylinder bump: radial in (x, y), constant in z.
    BallXY {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    /// Box bump: product of per-axis ramps.
    BoxRamp { inner: Box3, outer: Box3 },
}

impl BumpRegion {
    pub fn outer_bounds(&self) -> Box3 {
        match self {
            BumpRegion::BallXY {
                center,
                outer,
                ..
            } => Box3::new(
                [center[0] - outer, center[1] - outer, f64::NEG_INFINITY],
                [center[0] + outer, center[1] + outer, f64::INFINITY],
            ),
            BumpRegion::BoxRamp { outer, .. } => *outer,
        }
    }

    fn validate(&self) -> Result<(), FieldError> {
        match self {
            BumpRegion::BallXY { inner, outer, .. } => {
                if !(0.0 < *inner && inner < outer) {
                    return Err(FieldError::Parameter(
                        "bump ball needs 0 < inner < outer".into(),
                    ));
                }
            }
            BumpRegion::BoxRamp { inner, outer } => {
                for i in 0..3 {
                    if inner.min[i] <= outer.min[i] || inner.max[i] >= outer.max[i] {
                        return Err(FieldError::Parameter(
                            "bump box inner set must sit strictly inside the outer set".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Weight and gradient; both identically zero outside the outer set,
    /// weight ≡ 1 (gradient 0) on the inner set.
    pub fn weight_grad(&self, p: Vec3) -> (f64, Vec3) {
        match self {
            BumpRegion::BallXY {
                center,
                inner,
                outer,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let r = (dx * dx + dy * dy).sqrt();
                if r <= *inner {
                    (1.0, [0.0; 3])
                } else if r >= *outer {
                    (0.0, [0.0; 3])
                } else {
                    let width = outer - inner;
                    let (s, ds) = quintic_smoothstep((r - inner) / width);
                    let g = -ds / width / r;
                    (1.0 - s, [g * dx, g * dy, 0.0])
                }
            }
            BumpRegion::BoxRamp { inner, outer } => {
                let mut vals = [0.0; 3];
                let mut ders = [0.0; 3];
                for i in 0..3 {
                    let (v, d) = axis_ramp(
                        p[i],
                        outer.min[i],
                        inner.min[i],
                        inner.max[i],
                        outer.max[i],
                    );
                    vals[i] = v;
                    ders[i] = d;
                }
                let w = vals[0] * vals[1] * vals[2];
                (
                    w,
                    [
                        ders[0] * vals[1] * vals[2],
                        vals[0] * ders[1] * vals[2],
                        vals[0] * vals[1] * ders[2],
                    ],
                )
            }
        }
    }
}

/// 1-D plateau ramp: 0 outside [olo, ohi], 1 on [ilo, ihi], smoothstep on
/// the shoulders. Returns (value, derivative).
fn axis_ramp(x: f64, olo: f64, ilo: f64, ihi: f64, ohi: f64) -> (f64, f64) {
    if x <= olo || x >= ohi {
        (0.0, 0.0)
    } else if x < ilo {
        let w = ilo - olo;
        let (s, ds) = quintic_smoothstep((x - olo) / w);
        (s, ds / w)
    } else if x <= ihi {
        (1.0, 0.0)
    } else {
        let w = ohi - ihi;
        let (s, ds) = quintic_smoothstep((x - ihi) / w);
        (1.0 - s, -ds / w)
    }
}

/// Partition of unity: one implicit background weight plus one bump per
/// region. With pairwise-disjoint outer sets the background is exactly
/// `1 − Σ bumps`, so the weights sum to 1 everywhere.
pub struct BumpPartition {
    regions: Vec<BumpRegion>,
}

impl BumpPartition {
    pub fn with_background(regions: Vec<BumpRegion>) -> Result<Self, FieldError> {
        for r in &regions {
            r.validate()?;
        }
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                if boxes_overlap(&regions[i].outer_bounds(), &regions[j].outer_bounds()) {
                    return Err(FieldError::Composition(format!(
                        "bump regions {i} and {j} have overlapping outer sets"
                    )));
                }
            }
        }
        Ok(Self { regions })
    }

    /// Number of weights, background included.
    pub fn len(&self) -> usize {
        self.regions.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn regions(&self) -> &[BumpRegion] {
        &self.regions
    }

    /// Weights at `p`: index 0 is the background, then one per region.
    pub fn weights(&self, p: Vec3) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.len());
        w.push(0.0);
        let mut sum = 0.0;
        for r in &self.regions {
            let (v, _) = r.weight_grad(p);
            sum += v;
            w.push(v);
        }
        w[0] = 1.0 - sum;
        w
    }

    pub fn weights_grads(&self, p: Vec3) -> (Vec<f64>, Vec<Vec3>) {
        let mut w = Vec::with_capacity(self.len());
        let mut g = Vec::with_capacity(self.len());
        w.push(0.0);
        g.push([0.0; 3]);
        let mut sum = 0.0;
        let mut gsum = [0.0; 3];
        for r in &self.regions {
            let (v, gv) = r.weight_grad(p);
            sum += v;
            for i in 0..3 {
                gsum[i] += gv[i];
            }
            w.push(v);
            g.push(gv);
        }
        w[0] = 1.0 - sum;
        g[0] = [-gsum[0], -gsum[1], -gsum[2]];
        (w, g)
    }
}

fn boxes_overlap(a: &Box3, b: &Box3) -> bool {
    (0..3).all(|i| a.min[i] < b.max[i] && b.min[i] < a.max[i])
}
