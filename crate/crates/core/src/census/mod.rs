//! Physical-measure census: Birkhoff averages over a seed grid, clustered
//! by single linkage into basins, with per-cluster support diagnostics
//! and the `s ≤ 2·s_L` verdict.

mod birkhoff;
mod diagnostics;

pub use birkhoff::{birkhoff_graph, birkhoff_ode, BirkhoffVector, SingularityStats};
pub use diagnostics::{
    accumulation_sides, check_bound, lyapunov_top_ode, lyapunov_top_quotient,
    sectional_expansion_estimate, support_contains_singularity, BoundVerdict, SectionalEstimate,
};

use crate::equilibria::{self, EquilibriumReport};
use crate::geom::Vec3;
use crate::section::{ModelRuntime, SideTag};
use crate::zoo::{ModelPayload, SeedsSpec, ZooEntry};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("census unreliable: discard fraction {0:.3} > 0.5 (raise the horizon)")]
    Unreliable(f64),
    #[error("horizon {horizon} must be at least 10× burn-in {burn_in}")]
    Horizon { horizon: f64, burn_in: f64 },
    #[error(transparent)]
    Section(#[from] crate::section::SectionError),
}

/// Knobs of a census run; tolerances are in units of the a-priori
/// observable scales.
#[derive(Debug, Clone)]
pub struct CensusConfig {
    pub horizon: Option<f64>,
    pub burn_in: Option<f64>,
    /// Override of the entry's seed spec (grid per axis / per section).
    pub grid: Option<usize>,
    pub gap_tol: f64,
    pub cluster_tol: f64,
    pub radius_tol: f64,
    pub side_floor: f64,
    pub workers: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 0x5eed_f10e;

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            horizon: None,
            burn_in: None,
            grid: None,
            gap_tol: 0.01,
            cluster_tol: 0.05,
            radius_tol: 0.05,
            side_floor: 0.01,
            workers: 0,
            seed: DEFAULT_SEED,
        }
    }
}

/// Fixed observable set: x, y, z, x², |x|·|z|, and (when the model has
/// singularities) distance to the nearest one.
pub struct ObservableSet {
    pub names: Vec<&'static str>,
    pub scales: Vec<f64>,
    singularities: Vec<Vec3>,
}

impl ObservableSet {
    pub fn for_entry(entry: &ZooEntry, singularities: &[Vec3]) -> Self {
        let bb = entry.trapping.bounding_box();
        let half = |i: usize| (bb.edge(i) / 2.0).max(1e-9);
        let ext = |i: usize| bb.min[i].abs().max(bb.max[i].abs()).max(1e-9);
        let mut names = vec!["x", "y", "z", "x2", "abs_xz"];
        let mut scales = vec![
            half(0),
            half(1),
            half(2),
            ext(0) * ext(0) / 2.0,
            ext(0) * ext(2) / 2.0,
        ];
        if !singularities.is_empty() {
            names.push("dist_sing");
            scales.push(bb.diameter() / 2.0);
        }
        Self {
            names,
            scales,
            singularities: singularities.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn eval(&self, p: Vec3, out: &mut [f64]) {
        out[0] = p[0];
        out[1] = p[1];
        out[2] = p[2];
        out[3] = p[0] * p[0];
        out[4] = p[0].abs() * p[2].abs();
        if self.names.len() > 5 {
            out[5] = self
                .singularities
                .iter()
                .map(|&s| crate::geom::dist(p, s))
                .fold(f64::INFINITY, f64::min);
        }
    }

    /// Normalized Chebyshev distance between two average vectors.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.scales)
            .map(|((x, y), s)| (x - y).abs() / s)
            .fold(0.0, f64::max)
    }
}

/// Singularities the census accounts for, with their classification and
/// (for ODE models) the unit weak-stable direction used to tag which side
/// an orbit accumulates from.
pub struct CensusContext {
    pub singularities: Vec<Vec3>,
    pub reports: Vec<EquilibriumReport>,
    pub weak_stable_dirs: Vec<Option<Vec3>>,
    /// Lorenz-like count among equilibria inside the membership region.
    pub s_l_measured: usize,
}

/// Locates and classifies the singularities the bound applies to: the
/// declared records for section graphs, the membership-filtered equilibria
/// of the field for ODE models.
pub fn census_context(entry: &ZooEntry) -> CensusContext {
    match &entry.payload {
        ModelPayload::Graph(model) => {
            let reports: Vec<EquilibriumReport> = model
                .singularities
                .iter()
                .map(|s| {
                    equilibria::classify(s.location, &crate::geom::diag(s.params.eigenvalues()))
                })
                .collect();
            let singularities = reports.iter().map(|r| r.location).collect();
            let s_l = equilibria::count_lorenz_like(&reports);
            let weak_stable_dirs = vec![None; reports.len()];
            CensusContext {
                singularities,
                reports,
                weak_stable_dirs,
                s_l_measured: s_l,
            }
        }
        ModelPayload::Ode(field) => {
            let grid = (field.domain().min_edge() / 10.0).min(4.0);
            let all = equilibria::find_equilibria(field.as_ref(), grid);
            let in_set: Vec<EquilibriumReport> = all
                .into_iter()
                .filter(|r| entry.membership.contains(r.location))
                .collect();
            let singularities: Vec<Vec3> = in_set.iter().map(|r| r.location).collect();
            let weak_stable_dirs = in_set
                .iter()
                .map(|r| {
                    r.lambda_s.and_then(|ls| {
                        equilibria::real_eigenvector(&field.jacobian(r.location), ls)
                    })
                })
                .collect();
            let s_l = equilibria::count_lorenz_like(&in_set);
            CensusContext {
                singularities,
                reports: in_set,
                weak_stable_dirs,
                s_l_measured: s_l,
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub centroid: Vec<f64>,
    pub fraction: f64,
    pub members: usize,
    /// Per-singularity: does the cluster's support contain it?
    pub contains: Vec<bool>,
    /// Per-singularity accumulation sides among {top, bottom}.
    pub sides: Vec<Vec<SideTag>>,
    /// Index of a representative member (into the kept vectors).
    pub exemplar: usize,
    #[serde(skip)]
    pub member_indices: Vec<usize>,
}

pub struct MeasureCensus {
    pub label: String,
    pub s: usize,
    pub s_l: usize,
    pub clusters: Vec<Cluster>,
    pub discard_fraction: f64,
    pub total_seeds: usize,
    pub vectors: Vec<BirkhoffVector>,
    pub observables: ObservableSet,
    pub horizon: f64,
    pub burn_in: f64,
    pub seed: u64,
}

/// Runs the full census for a zoo entry.
pub fn census(entry: &ZooEntry, cfg: &CensusConfig) -> Result<MeasureCensus, CensusError> {
    let horizon = cfg.horizon.unwrap_or(entry.default_horizon);
    let burn_in = cfg.burn_in.unwrap_or(entry.default_burn_in);
    if horizon < 10.0 * burn_in {
        return Err(CensusError::Horizon { horizon, burn_in });
    }
    let ctx = census_context(entry);
    let observables = ObservableSet::for_entry(entry, &ctx.singularities);

    let vectors = match &entry.payload {
        ModelPayload::Ode(field) => {
            let seeds = ode_seeds(entry, cfg);
            let frames: Vec<(Vec3, Option<Vec3>)> = ctx
                .singularities
                .iter()
                .copied()
                .zip(ctx.weak_stable_dirs.iter().copied())
                .collect();
            let ball = cfg.radius_tol * entry.trapping.bounding_box().diameter() / 2.0;
            run_parallel(cfg.workers, &seeds, |&seed_pt| {
                birkhoff_ode(
                    field.as_ref(),
                    &entry.trapping,
                    seed_pt,
                    &observables,
                    horizon,
                    burn_in,
                    &frames,
                    ball,
                )
            })
        }
        ModelPayload::Graph(model) => {
            let runtime = ModelRuntime::new(model)?;
            let seeds = graph_seeds(model, entry, cfg);
            run_parallel(cfg.workers, &seeds, |&(node, pt)| {
                birkhoff_graph(
                    &runtime,
                    node,
                    pt,
                    &observables,
                    horizon as usize,
                    burn_in as usize,
                    cfg.radius_tol,
                )
            })
        }
    };

    let total = vectors.len();
    let kept: Vec<usize> = (0..total)
        .filter(|&i| {
            let v = &vectors[i];
            !v.discard
                && v.convergence_gap <= cfg.gap_tol
                && v.averages.iter().all(|x| x.is_finite())
        })
        .collect();
    let discard_fraction = (total - kept.len()) as f64 / total.max(1) as f64;
    if discard_fraction > 0.5 {
        return Err(CensusError::Unreliable(discard_fraction));
    }

    let assignments = single_linkage(&vectors, &kept, &observables, cfg.cluster_tol);
    let n_clusters = assignments.iter().copied().max().map_or(0, |m| m + 1);
    let mut clusters = Vec::with_capacity(n_clusters);
    for c in 0..n_clusters {
        let member_indices: Vec<usize> = kept
            .iter()
            .zip(&assignments)
            .filter(|(_, &a)| a == c)
            .map(|(&i, _)| i)
            .collect();
        let mut centroid = vec![0.0; observables.len()];
        for &i in &member_indices {
            for (acc, v) in centroid.iter_mut().zip(&vectors[i].averages) {
                *acc += v;
            }
        }
        for v in centroid.iter_mut() {
            *v /= member_indices.len() as f64;
        }
        let contains: Vec<bool> = (0..ctx.singularities.len())
            .map(|si| support_contains_singularity(&vectors, &member_indices, si))
            .collect();
        let sides: Vec<Vec<SideTag>> = (0..ctx.singularities.len())
            .map(|si| accumulation_sides(&vectors, &member_indices, si, cfg.side_floor))
            .collect();
        clusters.push(Cluster {
            centroid,
            fraction: member_indices.len() as f64 / total as f64,
            members: member_indices.len(),
            contains,
            sides,
            exemplar: member_indices[0],
            member_indices,
        });
    }
    clusters.sort_by(|a, b| {
        b.members
            .cmp(&a.members)
            .then(a.centroid[0].partial_cmp(&b.centroid[0]).unwrap())
    });

    Ok(MeasureCensus {
        label: entry.label.clone(),
        s: clusters.len(),
        s_l: ctx.s_l_measured,
        clusters,
        discard_fraction,
        total_seeds: total,
        vectors,
        observables,
        horizon,
        burn_in,
        seed: cfg.seed,
    })
}

fn ode_seeds(entry: &ZooEntry, cfg: &CensusConfig) -> Vec<Vec3> {
    let per_axis = match (cfg.grid, entry.seeds) {
        (Some(n), _) => n,
        (None, SeedsSpec::OdeGrid { per_axis }) => per_axis,
        (None, SeedsSpec::PerSection { .. }) => 20,
    };
    let bb = entry.trapping.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seeds = Vec::new();
    for ix in 0..per_axis {
        for iy in 0..per_axis {
            for iz in 0..per_axis {
                let mut c = |k: usize, i: usize| {
                    bb.min[k] + (i as f64 + rng.gen_range(0.05..0.95)) / per_axis as f64 * bb.edge(k)
                };
                let p = [c(0, ix), c(1, iy), c(2, iz)];
                if entry.trapping.contains(p) {
                    seeds.push(p);
                }
            }
        }
    }
    seeds
}

fn graph_seeds(
    model: &crate::section::SectionGraphModel,
    entry: &ZooEntry,
    cfg: &CensusConfig,
) -> Vec<(usize, [f64; 2])> {
    let count = match (cfg.grid, entry.seeds) {
        (Some(n), _) => n * n,
        (None, SeedsSpec::PerSection { count }) => count,
        (None, SeedsSpec::OdeGrid { .. }) => 256,
    };
    let side = (count as f64).sqrt().ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seeds = Vec::new();
    for (ni, node) in model.nodes.iter().enumerate() {
        for iu in 0..side {
            for iv in 0..side {
                let u = node.bounds[0][0]
                    + (iu as f64 + rng.gen_range(0.05..0.95)) / side as f64
                        * (node.bounds[0][1] - node.bounds[0][0]);
                let v = node.bounds[1][0]
                    + (iv as f64 + rng.gen_range(0.05..0.95)) / side as f64
                        * (node.bounds[1][1] - node.bounds[1][0]);
                seeds.push((ni, [u, v]));
            }
        }
    }
    seeds
}

fn run_parallel<S: Sync, F: Fn(&S) -> BirkhoffVector + Sync + Send>(
    workers: usize,
    seeds: &[S],
    job: F,
) -> Vec<BirkhoffVector> {
    if workers == 0 {
        seeds.par_iter().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool");
        pool.install(|| seeds.par_iter().map(job).collect())
    }
}

/// Single-linkage clustering: union points whose normalized Chebyshev
/// distance is below the linking radius.
fn single_linkage(
    vectors: &[BirkhoffVector],
    kept: &[usize],
    obs: &ObservableSet,
    radius: f64,
) -> Vec<usize> {
    let n = kept.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            let d = obs.distance(&vectors[kept[a]].averages, &vectors[kept[b]].averages);
            if d <= radius {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut label_of_root: std::collections::HashMap<usize, usize> = Default::default();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = find(&mut parent, i);
        let next = label_of_root.len();
        labels.push(*label_of_root.entry(r).or_insert(next));
    }
    labels
}

/// Census stability under horizon doubling: equal cluster count and
/// centroid drift below half the linking radius (matched by nearest
/// centroid).
pub fn stable_under_doubling(
    entry: &ZooEntry,
    cfg: &CensusConfig,
) -> Result<(MeasureCensus, MeasureCensus, bool), CensusError> {
    let base = census(entry, cfg)?;
    let mut cfg2 = cfg.clone();
    cfg2.horizon = Some(base.horizon * 2.0);
    cfg2.burn_in = Some(base.burn_in);
    let doubled = census(entry, &cfg2)?;
    let mut ok = base.s == doubled.s;
    if ok {
        for c in &base.clusters {
            let drift = doubled
                .clusters
                .iter()
                .map(|d| base.observables.distance(&c.centroid, &d.centroid))
                .fold(f64::INFINITY, f64::min);
            if drift > cfg.cluster_tol / 2.0 {
                ok = false;
            }
        }
    }
    Ok((base, doubled, ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{fixtures, zoo_entry};

    fn fast_graph_cfg() -> CensusConfig {
        CensusConfig {
            horizon: Some(20_000.0),
            burn_in: Some(1_000.0),
            grid: Some(8), // 64 seeds per section
            ..Default::default()
        }
    }

    #[test]
    fn geometric_lorenz_census_single_cluster() {
        let entry = zoo_entry("geometric_lorenz").unwrap();
        let c = census(&entry, &fast_graph_cfg()).unwrap();
        assert_eq!(c.s, 1, "clusters: {:?}", c.clusters.len());
        assert_eq!(c.s_l, 1);
        let cl = &c.clusters[0];
        assert!(cl.contains[0], "support must contain sigma0");
        assert_eq!(cl.sides[0], vec![crate::section::SideTag::Top]);
        let sum: f64 = c.clusters.iter().map(|x| x.fraction).sum::<f64>() + c.discard_fraction;
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(check_bound(&c, c.s_l).ok);
    }

    #[test]
    fn sharp_census_two_sided_pair() {
        let entry = zoo_entry("sharp_1").unwrap();
        let c = census(&entry, &fast_graph_cfg()).unwrap();
        assert_eq!(c.s, 2);
        assert_eq!(c.s_l, 1);
        let mut sides: Vec<Vec<crate::section::SideTag>> =
            c.clusters.iter().map(|cl| cl.sides[0].clone()).collect();
        sides.sort();
        assert_eq!(
            sides,
            vec![
                vec![crate::section::SideTag::Top],
                vec![crate::section::SideTag::Bottom]
            ]
        );
        for cl in &c.clusters {
            assert!(cl.contains[0]);
        }
        let verdict = check_bound(&c, c.s_l);
        assert!(verdict.ok);
        assert_eq!(verdict.s_singular, 2); // sharp equality s = 2 s_L
    }

    #[test]
    fn triple_fixture_violates_bound() {
        let entry = fixtures()
            .into_iter()
            .find(|e| e.label == "fixture_triple_passage")
            .unwrap();
        let c = census(&entry, &fast_graph_cfg()).unwrap();
        assert_eq!(c.s, 3);
        let verdict = check_bound(&c, c.s_l);
        assert!(!verdict.ok);
        assert_eq!(verdict.s_singular, 3);
        assert_eq!(verdict.s_l, 1);
    }

    #[test]
    fn horizon_burnin_validation() {
        let entry = zoo_entry("geometric_lorenz").unwrap();
        let cfg = CensusConfig {
            horizon: Some(100.0),
            burn_in: Some(50.0),
            ..Default::default()
        };
        assert!(matches!(
            census(&entry, &cfg),
            Err(CensusError::Horizon { .. })
        ));
    }

    #[test]
    fn dirac_seed_separates_from_continuous_cluster() {
        // a seed exactly on the stable manifold produces the Dirac vector
        let entry = zoo_entry("geometric_lorenz").unwrap();
        let ModelPayload::Graph(model) = &entry.payload else {
            panic!()
        };
        let runtime = ModelRuntime::new(model).unwrap();
        let ctx = census_context(&entry);
        let obs = ObservableSet::for_entry(&entry, &ctx.singularities);
        let v = birkhoff_graph(&runtime, 0, [0.0, 0.3], &obs, 1000, 10, 0.05);
        assert_eq!(v.dirac, Some(0));
        let generic = birkhoff_graph(&runtime, 0, [0.377, 0.3], &obs, 20_000, 1000, 0.05);
        let d = obs.distance(&v.averages, &generic.averages);
        assert!(d > 0.05, "Dirac vs continuous distance {d}");
    }

    #[test]
    fn glued_census_counts_attached_pieces() {
        let entry = zoo_entry("glued_suspension_1").unwrap();
        let cfg = CensusConfig {
            grid: Some(8),
            ..Default::default()
        };
        let c = census(&entry, &cfg).unwrap();
        assert_eq!(c.s, 2, "expected 2 clusters, discard {}", c.discard_fraction);
        assert!(c.clusters.iter().all(|cl| cl.contains.is_empty()));
        assert_eq!(c.s_l, 0);
        assert!(check_bound(&c, c.s_l).ok);
    }
}
