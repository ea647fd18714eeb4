//! Per-cluster support diagnostics, Lyapunov and sectional-expansion
//! estimates, and the bound verdict.

use super::birkhoff::BirkhoffVector;
use super::MeasureCensus;
use crate::field::VectorField;
use crate::geom::Vec3;
use crate::integrate::{
    integrate_with_tangent, IntegrateError, TangentSeed,
};
use crate::map1d::PiecewiseMap1D;
use crate::section::SideTag;
use serde::Serialize;

/// True iff the cluster's member orbits enter the singularity ball (or
/// pass the quotient origin within the passage tolerance) at least 10
/// times in total and with positive frequency.
pub fn support_contains_singularity(
    vectors: &[BirkhoffVector],
    members: &[usize],
    sing: usize,
    ) -> bool {
    let mut near = 0usize;
    let mut passages = 0usize;
    let mut dirac = false;
    for &i in members {
        let st = &vectors[i].sing_stats[sing];
        near += st.near_entries;
        passages += st.total_passages.max(st.near_entries);
        dirac |= vectors[i].dirac == Some(sing);
    }
    dirac || (near >= 10 && passages > 0)
}

/// Sides of the singularity's local stable manifold visited with
/// frequency above `side_floor` among near passages.
pub fn accumulation_sides(
    vectors: &[BirkhoffVector],
    members: &[usize],
    sing: usize,
    side_floor: f64,
) -> Vec<SideTag> {
    let mut counts = [0usize; 2];
    for &i in members {
        let st = &vectors[i].sing_stats[sing];
        counts[0] += st.side_counts[0];
        counts[1] += st.side_counts[1];
    }
    let total = (counts[0] + counts[1]).max(1) as f64;
    let mut out = Vec::new();
    if counts[0] as f64 / total > side_floor {
        out.push(SideTag::Top);
    }
    if counts[1] as f64 / total > side_floor {
        out.push(SideTag::Bottom);
    }
    out
}

/// Benettin-style top Lyapunov exponent of an ODE orbit.
pub fn lyapunov_top_ode(
    field: &dyn VectorField,
    seed: Vec3,
    horizon: f64,
    tol: f64,
) -> Result<f64, IntegrateError> {
    let res = integrate_with_tangent(
        field,
        seed,
        TangentSeed::Vector([0.37, 0.52, 0.77]),
        horizon,
        tol,
    )?;
    Ok(res.log.tail_rate(0.1))
}

/// Average of `log |f'|` along a quotient-map orbit (section-graph
/// models).
pub fn lyapunov_top_quotient(map: &PiecewiseMap1D, x0: f64, iters: usize) -> f64 {
    let mut x = x0;
    let mut total = 0.0;
    let mut n = 0usize;
    let burn = iters / 10;
    for it in 0..iters {
        let Some(d) = map.deriv(x) else { break };
        if it >= burn {
            total += d.abs().ln();
            n += 1;
        }
        match map.eval(x) {
            Some(next) => x = next.clamp(map.domain[0], map.domain[1]),
            None => break,
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        total / n as f64
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectionalEstimate {
    pub k_est: f64,
    pub theta_est: f64,
    /// Fit residual above 10% of the cumulative-log range.
    pub inconclusive: bool,
}

/// Least-squares fit of the 2-plane log-area growth `log K + θ·t` along
/// an orbit, from the tangent-frame renormalization log.
pub fn sectional_expansion_estimate(
    field: &dyn VectorField,
    seed: Vec3,
    frame: (Vec3, Vec3),
    horizon: f64,
    tol: f64,
) -> Result<SectionalEstimate, IntegrateError> {
    let res = integrate_with_tangent(
        field,
        seed,
        TangentSeed::Frame(frame.0, frame.1),
        horizon,
        tol,
    )?;
    let (theta, log_k, resid) = res.log.fit_line();
    Ok(SectionalEstimate {
        k_est: log_k.exp(),
        theta_est: theta,
        inconclusive: resid > 0.10,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundVerdict {
    pub ok: bool,
    /// Clusters whose support contains some singularity.
    pub s_singular: usize,
    pub s_total: usize,
    pub s_l: usize,
}

/// The empirical Theorem-A check: the number of singular clusters must
/// not exceed `2·s_L`. Non-singular clusters (hyperbolic attractors in
/// the set) are exempt; `s_L = 0` forces zero singular clusters, which
/// holds vacuously since there is nothing to contain.
pub fn check_bound(census: &MeasureCensus, s_l: usize) -> BoundVerdict {
    let s_singular = census
        .clusters
        .iter()
        .filter(|c| c.contains.iter().any(|&b| b))
        .count();
    BoundVerdict {
        ok: s_singular <= 2 * s_l,
        s_singular,
        s_total: census.s,
        s_l,
    }
}
