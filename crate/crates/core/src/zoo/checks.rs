//! Trapping-region and connectedness checks for ODE zoo entries.

use super::{ModelPayload, ZooEntry};
use crate::field::{ReversedField, VectorField};
use crate::geom::{dist, dot, Vec3};
use crate::integrate::{integrate_observe, IntegrateError};
use crate::region::Region;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZooCheckError {
    #[error("{0} is not an ODE entry")]
    NotOde(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

#[derive(Debug, Clone)]
pub struct TrappingReport {
    pub pass: bool,
    pub inward_fraction: f64,
    /// Largest outward-normal velocity component over the samples
    /// (negative everywhere on a genuinely trapping boundary).
    pub worst_margin: f64,
    pub worst_point: Vec3,
    pub samples: usize,
}

/// Samples the trapping-region boundary and verifies inward flow at
/// ≥ 99.9% of the samples.
pub fn trapping_check(entry: &ZooEntry, samples: usize, seed: u64) -> Result<TrappingReport, ZooCheckError> {
    let ModelPayload::Ode(field) = &entry.payload else {
        return Err(ZooCheckError::NotOde(entry.label.clone()));
    };
    trapping_check_region(field.as_ref(), &entry.trapping, samples, seed)
}

pub fn trapping_check_region(
    field: &dyn VectorField,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<TrappingReport, ZooCheckError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = region.sample_boundary(samples, &mut rng);
    let mut inward = 0usize;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_point = [0.0; 3];
    for (p, n) in &pts {
        let v = field.velocity(*p);
        let m = dot(v, *n);
        if m < 0.0 {
            inward += 1;
        }
        if m > worst_margin {
            worst_margin = m;
            worst_point = *p;
        }
    }
    let frac = inward as f64 / pts.len() as f64;
    Ok(TrappingReport {
        pass: frac >= 0.999,
        inward_fraction: frac,
        worst_margin,
        worst_point,
        samples: pts.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ConnectednessReport {
    pub connected: bool,
    pub components: usize,
    pub cloud_size: usize,
    /// One representative point per component (singleton when connected).
    pub representatives: Vec<Vec3>,
}

/// Numerical surrogate of the connectedness of `Λ = ∩ φ_t(U)`:
/// the forward endpoint cloud of a seed grid (with late-trajectory
/// samples), together with grid candidates that persist inside the
/// slightly fattened region under the backward flow — that part holds the
/// non-attracting unstable sheets connecting the attractors. Pass iff the
/// ε-neighborhood graph of the cloud is connected.
pub fn connectedness_check(
    entry: &ZooEntry,
    horizon: f64,
    eps: f64,
    seed: u64,
) -> Result<ConnectednessReport, ZooCheckError> {
    let ModelPayload::Ode(field_arc) = &entry.payload else {
        return Err(ZooCheckError::NotOde(entry.label.clone()));
    };
    let field = field_arc.as_ref();
    let region = &entry.trapping;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-6;
    // periodic coordinates (the suspension angle) must be folded into the
    // fundamental domain before neighborhood tests
    let domain = field.domain();
    let mut cloud: Vec<Vec3> = Vec::new();

    // forward endpoint cloud; a subset of seeds also leaves a late-window
    // trail subdivided to eps/2 spacing, so each trail is an ε-chain and
    // endpoints link to it wherever the invariant measure puts them
    let bb = region.bounding_box();
    let per_axis = 7usize;
    let late = horizon - (10.0_f64).min(0.2 * horizon);
    let max_gap = 0.5 * eps;
    let mut seed_counter = 0usize;
    for ix in 0..per_axis {
        for iy in 0..per_axis {
            for iz in 0..per_axis {
                let mut f = |k: usize, i: usize| {
                    bb.min[k] + (i as f64 + rng.gen_range(0.1..0.9)) / per_axis as f64 * bb.edge(k)
                };
                let seed_pt = [f(0, ix), f(1, iy), f(2, iz)];
                if !region.contains(seed_pt) {
                    continue;
                }
                seed_counter += 1;
                let leave_trail = seed_counter % 8 == 0;
                let mut last = seed_pt;
                let run = integrate_observe(field, seed_pt, horizon, tol, |_t0, t1, y0, y1| {
                    last = y1;
                    if leave_trail && t1 >= late {
                        // chord subdivision keeps the trail an ε/2-chain
                        let gap = dist(y0, y1);
                        let pieces = (gap / max_gap).ceil().max(1.0) as usize;
                        for k in 1..=pieces {
                            let s = k as f64 / pieces as f64;
                            cloud.push(domain.wrap([
                                y0[0] + s * (y1[0] - y0[0]),
                                y0[1] + s * (y1[1] - y0[1]),
                                y0[2] + s * (y1[2] - y0[2]),
                            ]));
                        }
                    }
                    true
                });
                match run {
                    Ok((_, _, exited)) if !exited => cloud.push(domain.wrap(last)),
                    _ => {}
                }
            }
        }
    }

    // backward-persistent candidates: the Λ surrogate for parts of the
    // attracting set no forward orbit converges to
    let backward_horizon = 2.0_f64.min(horizon);
    let spacing = (eps / 2.0).max(1e-3);
    let reversed = ReversedField(field_arc.clone());
    for cand in region.grid_inside(spacing, 28) {
        let mut stayed = true;
        let run = integrate_observe(&reversed, cand, backward_horizon, 1e-6, |_t0, _t1, _y0, y1| {
            if !region.contains_fattened(y1, 0.05) {
                stayed = false;
                return false;
            }
            true
        });
        match run {
            Ok((_, _, exited)) if stayed && !exited => cloud.push(cand),
            _ => {}
        }
    }

    let (components, reps) = epsilon_components(&cloud, eps);
    Ok(ConnectednessReport {
        connected: components == 1,
        components,
        cloud_size: cloud.len(),
        representatives: reps,
    })
}

/// Connected components of the ε-neighborhood graph, via union-find over
/// a spatial hash of ε-cells.
fn epsilon_components(cloud: &[Vec3], eps: f64) -> (usize, Vec<Vec3>) {
    if cloud.is_empty() {
        return (0, Vec::new());
    }
    let mut parent: Vec<usize> = (0..cloud.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let cell = |p: Vec3| -> (i64, i64, i64) {
        (
            (p[0] / eps).floor() as i64,
            (p[1] / eps).floor() as i64,
            (p[2] / eps).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in cloud.iter().enumerate() {
        buckets.entry(cell(p)).or_default().push(i);
    }
    for (i, &p) in cloud.iter().enumerate() {
        let (cx, cy, cz) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &j in list {
                            if j > i && dist(p, cloud[j]) <= eps {
                                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                                if ri != rj {
                                    parent[ri] = rj;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut reps: HashMap<usize, Vec3> = HashMap::new();
    for i in 0..cloud.len() {
        let r = find(&mut parent, i);
        reps.entry(r).or_insert(cloud[i]);
    }
    let representatives: Vec<Vec3> = reps.values().copied().collect();
    (reps.len(), representatives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{fixtures, zoo_entry};

    #[test]
    fn lorenz_cylinder_is_trapping() {
        let entry = zoo_entry("lorenz_classic").unwrap();
        let rep = trapping_check(&entry, 10_000, 7).unwrap();
        assert!(rep.pass, "inward fraction {}", rep.inward_fraction);
        assert!(rep.worst_margin < 0.0, "worst margin {}", rep.worst_margin);
    }

    #[test]
    fn glued_box_is_trapping() {
        let entry = zoo_entry("glued_suspension_1").unwrap();
        let rep = trapping_check(&entry, 10_000, 7).unwrap();
        assert!(rep.pass, "inward fraction {}", rep.inward_fraction);
    }

    #[test]
    fn too_small_box_fails() {
        let entry = zoo_entry("lorenz_classic").unwrap();
        let small = Region::Box(crate::region::Box3::new([-5.0; 3], [5.0; 3]));
        let ModelPayload::Ode(f) = &entry.payload else { panic!() };
        let rep = trapping_check_region(f.as_ref(), &small, 10_000, 7).unwrap();
        assert!(!rep.pass);
        assert!(rep.worst_margin > 0.0);
    }

    #[test]
    fn graph_entry_rejected() {
        let entry = zoo_entry("sharp_1").unwrap();
        assert!(matches!(
            trapping_check(&entry, 100, 7),
            Err(ZooCheckError::NotOde(_))
        ));
    }

    #[test]
    fn lorenz_connected() {
        let entry = zoo_entry("lorenz_classic").unwrap();
        let rep = connectedness_check(&entry, 200.0, 1.0, 11).unwrap();
        assert!(rep.connected, "{} components", rep.components);
    }

    #[test]
    fn glued_connected_through_unstable_sheets() {
        let entry = zoo_entry("glued_suspension_1").unwrap();
        let rep = connectedness_check(&entry, 500.0, 0.2, 11).unwrap();
        assert!(rep.connected, "{} components", rep.components);
    }

    #[test]
    fn disjoint_pair_disconnected() {
        let entry = fixtures()
            .into_iter()
            .find(|e| e.label == "fixture_disjoint_pair")
            .unwrap();
        let rep = connectedness_check(&entry, 100.0, 1.0, 11).unwrap();
        assert!(!rep.connected);
        assert!(rep.components >= 2);
        assert!(rep.representatives.len() >= 2);
    }
}
