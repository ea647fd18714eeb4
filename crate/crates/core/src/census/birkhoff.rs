//! Time and orbit averages of the observable set along single orbits,
//! with near-singularity visit statistics.

use super::ObservableSet;
use crate::field::VectorField;
use crate::geom::{dist, dot, sub, Vec3};
use crate::integrate::integrate_observe;
use crate::region::Region;
use crate::section::{ModelRuntime, SideTag, StepOutcome};

/// Near-singularity visit record for one orbit and one singularity.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingularityStats {
    /// Ball entries (ODE) or near passages `|u| < tol` (graph).
    pub near_entries: usize,
    /// Side counts among near visits: [top, bottom].
    pub side_counts: [usize; 2],
    pub min_distance: f64,
    /// Total passages through the singularity regardless of distance
    /// (graph models; equals near_entries for ODE).
    pub total_passages: usize,
}

#[derive(Debug, Clone)]
pub struct BirkhoffVector {
    pub seed: Vec3,
    pub averages: Vec<f64>,
    pub horizon: f64,
    /// Normalized max deviation between half- and full-horizon averages.
    pub convergence_gap: f64,
    pub discard: bool,
    pub exited: bool,
    /// Orbit hit a stable manifold and converged to the singularity.
    pub dirac: Option<usize>,
    pub sing_stats: Vec<SingularityStats>,
    /// Graph models: which nodes the orbit visited.
    pub nodes_visited: Vec<bool>,
}

/// Time averages of an ODE orbit by trapezoid accumulation over the
/// accepted steps, after discarding `burn_in`. Orbits leaving the
/// trapping region are flagged and discarded by the census.
#[allow(clippy::too_many_arguments)]
pub fn birkhoff_ode(
    field: &dyn VectorField,
    region: &Region,
    seed: Vec3,
    obs: &ObservableSet,
    horizon: f64,
    burn_in: f64,
    singularities: &[(Vec3, Option<Vec3>)],
    ball_radius: f64,
) -> BirkhoffVector {
    let nobs = obs.len();
    let mut acc = vec![0.0; nobs];
    let mut acc_half = vec![0.0; nobs];
    let mut time = 0.0;
    let mut time_half = 0.0;
    let mut stats = vec![
        SingularityStats {
            min_distance: f64::INFINITY,
            ..Default::default()
        };
        singularities.len()
    ];
    let mut inside_ball = vec![false; singularities.len()];
    let mut left_region = false;
    let domain = field.domain();
    let tol = 1e-6;
    let half_mark = burn_in + (horizon - burn_in) / 2.0;

    let mut vals0 = vec![0.0; nobs];
    let mut vals1 = vec![0.0; nobs];
    let run = integrate_observe(field, seed, horizon, tol, |t0, t1, y0, y1| {
        let w0 = domain.wrap(y0);
        let w1 = domain.wrap(y1);
        for (si, (loc, dir)) in singularities.iter().enumerate() {
            let d = dist(w1, *loc);
            stats[si].min_distance = stats[si].min_distance.min(d);
            let inside = d < ball_radius;
            if inside && !inside_ball[si] {
                stats[si].near_entries += 1;
                stats[si].total_passages += 1;
                if let Some(e) = dir {
                    let s = dot(*e, sub(w1, *loc));
                    if s >= 0.0 {
                        stats[si].side_counts[0] += 1;
                    } else {
                        stats[si].side_counts[1] += 1;
                    }
                }
            }
            inside_ball[si] = inside;
        }
        if !region.contains_fattened(y1, 0.02) {
            left_region = true;
            return false;
        }
        if t1 <= burn_in {
            return true;
        }
        let lo = t0.max(burn_in);
        let h = t1 - lo;
        if h <= 0.0 {
            return true;
        }
        obs.eval(w0, &mut vals0);
        obs.eval(w1, &mut vals1);
        let in_half = t1 <= half_mark;
        for k in 0..nobs {
            let inc = 0.5 * h * (vals0[k] + vals1[k]);
            acc[k] += inc;
            if in_half {
                acc_half[k] += inc;
            }
        }
        time += h;
        if in_half {
            time_half += h;
        }
        true
    });
    let exited = matches!(run, Ok((_, _, true))) || run.is_err() || left_region;

    if time <= 0.0 {
        // the orbit never accumulated averaging time (equilibrium seed or
        // early exit): Dirac at the seed itself when it is an equilibrium
        let mut averages = vec![0.0; nobs];
        obs.eval(domain.wrap(seed), &mut averages);
        return BirkhoffVector {
            seed,
            averages,
            horizon,
            convergence_gap: 0.0,
            discard: exited,
            exited,
            dirac: None,
            sing_stats: stats,
            nodes_visited: Vec::new(),
        };
    }

    let averages: Vec<f64> = acc.iter().map(|a| a / time).collect();
    let gap = if time_half > 0.0 {
        let half: Vec<f64> = acc_half.iter().map(|a| a / time_half).collect();
        obs.distance(&averages, &half)
    } else {
        f64::INFINITY
    };
    BirkhoffVector {
        seed,
        averages,
        horizon,
        convergence_gap: gap,
        discard: exited,
        exited,
        dirac: None,
        sing_stats: stats,
        nodes_visited: Vec::new(),
    }
}

/// Orbit averages of a section-graph model, weighted by the transit times
/// of the transitions; absorbed orbits report the Dirac averages at the
/// singularity.
pub fn birkhoff_graph(
    runtime: &ModelRuntime,
    node0: usize,
    pt0: [f64; 2],
    obs: &ObservableSet,
    horizon_iters: usize,
    burn_iters: usize,
    passage_tol: f64,
) -> BirkhoffVector {
    let nobs = obs.len();
    let model = runtime.model;
    let seed3 = runtime.embed(node0, pt0);
    let mut acc = vec![0.0; nobs];
    let mut acc_half = vec![0.0; nobs];
    let mut time = 0.0;
    let mut time_half = 0.0;
    let mut stats = vec![
        SingularityStats {
            min_distance: f64::INFINITY,
            ..Default::default()
        };
        model.singularities.len()
    ];
    let mut nodes_visited = vec![false; model.nodes.len()];
    let mut vals = vec![0.0; nobs];
    let half_mark = burn_iters + (horizon_iters - burn_iters) / 2;

    let mut node = node0;
    let mut pt = pt0;
    let mut dirac = None;
    for it in 0..horizon_iters {
        nodes_visited[node] = true;
        match runtime.step(node, pt) {
            StepOutcome::Mapped {
                node: next,
                point,
                time: dt,
                passage,
                ..
            } => {
                if let Some((si, side, abs_u)) = passage {
                    stats[si].total_passages += 1;
                    stats[si].min_distance = stats[si].min_distance.min(abs_u);
                    if abs_u < passage_tol {
                        stats[si].near_entries += 1;
                        match side {
                            SideTag::Top => stats[si].side_counts[0] += 1,
                            SideTag::Bottom => stats[si].side_counts[1] += 1,
                            SideTag::None => {}
                        }
                    }
                }
                if it >= burn_iters {
                    obs.eval(runtime.embed(node, pt), &mut vals);
                    for k in 0..nobs {
                        let inc = dt * vals[k];
                        acc[k] += inc;
                        if it < half_mark {
                            acc_half[k] += inc;
                        }
                    }
                    time += dt;
                    if it < half_mark {
                        time_half += dt;
                    }
                }
                node = next;
                pt = point;
            }
            StepOutcome::Absorbed { singularity } => {
                dirac = Some(singularity);
                break;
            }
            StepOutcome::Stuck => {
                // measure-zero boundary point: no usable averages
                let mut averages = vec![0.0; nobs];
                obs.eval(seed3, &mut averages);
                return BirkhoffVector {
                    seed: seed3,
                    averages,
                    horizon: horizon_iters as f64,
                    convergence_gap: f64::INFINITY,
                    discard: true,
                    exited: false,
                    dirac: None,
                    sing_stats: stats,
                    nodes_visited,
                };
            }
        }
    }

    if let Some(si) = dirac {
        let mut averages = vec![0.0; nobs];
        obs.eval(model.singularities[si].location, &mut averages);
        return BirkhoffVector {
            seed: seed3,
            averages,
            horizon: horizon_iters as f64,
            convergence_gap: 0.0,
            discard: false,
            exited: false,
            dirac: Some(si),
            sing_stats: stats,
            nodes_visited,
        };
    }

    let averages: Vec<f64> = acc.iter().map(|a| a / time.max(1e-300)).collect();
    let gap = if time_half > 0.0 {
        let half: Vec<f64> = acc_half.iter().map(|a| a / time_half).collect();
        obs.distance(&averages, &half)
    } else {
        f64::INFINITY
    };
    BirkhoffVector {
        seed: seed3,
        averages,
        horizon: horizon_iters as f64,
        convergence_gap: gap,
        discard: false,
        exited: false,
        dirac: None,
        sing_stats: stats,
        nodes_visited,
    }
}
