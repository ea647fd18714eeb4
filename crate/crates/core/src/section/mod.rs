//! Geometric models as directed graphs of planar cross-sections joined by
//! explicit transition maps.
//!
//! A [`SectionGraphModel`] is pure data (it serializes to JSON, so the
//! model zoo is also data): rectangular section nodes embedded in 3-space,
//! singularity records with linear saddle rates, and transitions of four
//! kinds — closed-form linear passages, affine reinjections, winding
//! reinjections with finitely many full branches, and tube routings that
//! mark where wandering strips hand orbits to another piece.

mod graph;
mod models;
mod passage;
mod quotient;

pub use graph::{GraphOrbitStep, ModelRuntime, ReturnMap, ReturnOutcome, StepOutcome};
pub use models::{
    chained_model, double_lorenz_model, geometric_lorenz_model, sharp_model, sharp_single,
    triple_passage_model,
};
pub use passage::{linear_passage, LinearSaddleParams, PassageOutcome};
pub use quotient::{
    lower_winding_quotient, quotient_lorenz_map, winding_eval, winding_map, QuotientSpec,
};

use crate::geom::Vec3;
use crate::map1d::MapError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SectionError {
    #[error("saddle rates must satisfy λ2<λ3<0<−λ3<λ1, got ({lambda1}, {lambda2}, {lambda3})")]
    SaddleParams {
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
    },
    #[error("invalid quotient parameters: {0}")]
    QuotientParams(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("transition {transition} references unknown {what} `{id}`")]
    UnknownRef {
        transition: String,
        what: &'static str,
        id: String,
    },
    #[error("transition {transition} image leaves target bounds at {point:?}")]
    ImageContainment { transition: String, point: [f64; 2] },
    #[error("node {node} outgoing transitions cover only {fraction} of its rectangle")]
    CoverGap { node: String, fraction: f64 },
    #[error("transitive piece {0} is not strongly connected")]
    NotStronglyConnected(String),
    #[error("orbit did not return to {node} within {hops} transitions")]
    NoReturn { node: String, hops: usize },
}

/// Which side of the singularity's local stable manifold a passage runs
/// along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum SideTag {
    Top,
    Bottom,
    None,
}

/// Planar rectangular cross-section embedded in 3-space. In-plane
/// coordinates `(u, v)` run along the two non-normal axes in increasing
/// order, relative to `origin`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionNode {
    pub id: String,
    /// Normal axis (0 = x, 1 = y, 2 = z).
    pub axis: usize,
    pub origin: Vec3,
    /// `[[u_lo, u_hi], [v_lo, v_hi]]`; nondegenerate.
    pub bounds: [[f64; 2]; 2],
    /// Which in-plane coordinate projects to the 1-D quotient (0 = u).
    pub quotient_coord: usize,
}

impl SectionNode {
    pub fn in_plane_axes(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    pub fn embed(&self, pt: [f64; 2]) -> Vec3 {
        let [a, b] = self.in_plane_axes();
        let mut p = self.origin;
        p[a] += pt[0];
        p[b] += pt[1];
        p
    }

    pub fn contains(&self, pt: [f64; 2], slack: f64) -> bool {
        pt[0] >= self.bounds[0][0] - slack
            && pt[0] <= self.bounds[0][1] + slack
            && pt[1] >= self.bounds[1][0] - slack
            && pt[1] <= self.bounds[1][1] + slack
    }
}

/// Lorenz-like singularity record: location plus local linear rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Singularity {
    pub id: String,
    pub location: Vec3,
    pub params: LinearSaddleParams,
}

/// Part of the source rectangle a transition applies to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "part", rename_all = "snake_case")]
pub enum SubDomain {
    All,
    UPositive,
    UNegative,
    VPositive,
    VNegative,
    /// `lo ≤ u < hi` — the tube-routing wandering strip (empty when
    /// `lo == hi`, the default measure-zero marker).
    UStrip { lo: f64, hi: f64 },
}

impl SubDomain {
    pub fn contains(&self, pt: [f64; 2]) -> bool {
        match *self {
            SubDomain::All => true,
            SubDomain::UPositive => pt[0] > 0.0,
            SubDomain::UNegative => pt[0] < 0.0,
            SubDomain::VPositive => pt[1] > 0.0,
            SubDomain::VNegative => pt[1] < 0.0,
            SubDomain::UStrip { lo, hi } => pt[0] >= lo && pt[0] < hi,
        }
    }

    /// Fraction of the rectangle `bounds` this sub-domain covers.
    pub fn measure_fraction(&self, bounds: [[f64; 2]; 2]) -> f64 {
        let u_len = bounds[0][1] - bounds[0][0];
        let v_len = bounds[1][1] - bounds[1][0];
        match *self {
            SubDomain::All => 1.0,
            SubDomain::UPositive => (bounds[0][1].max(0.0) - 0.0_f64.max(bounds[0][0])).max(0.0) / u_len,
            SubDomain::UNegative => (0.0_f64.min(bounds[0][1]) - bounds[0][0].min(0.0)).max(0.0) / u_len,
            SubDomain::VPositive => (bounds[1][1].max(0.0) - 0.0_f64.max(bounds[1][0])).max(0.0) / v_len,
            SubDomain::VNegative => (0.0_f64.min(bounds[1][1]) - bounds[1][0].min(0.0)).max(0.0) / v_len,
            SubDomain::UStrip { lo, hi } => ((hi.min(bounds[0][1]) - lo.max(bounds[0][0])).max(0.0)) / u_len,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionKind {
    /// Closed-form saddle passage from a `z = ±1` local section to the
    /// `x = sgn(u)` exit face of `singularity`.
    LinearPassage { singularity: String, entry_face: i8 },
    /// Affine reinjection from an exit face back into a section:
    /// quotient output `sgn·(c·|v| − 1)`, fiber `offset + contraction·u`.
    AffineReinjection {
        sgn: f64,
        c: f64,
        contraction: f64,
        offset: f64,
        time: f64,
    },
    /// Straddling winding reinjection from the lower face half into the
    /// lower section: `u' = 2·W(|v|) − 1` over the truncated winding map.
    WindingMap {
        branches: usize,
        base_slope: f64,
        contraction: f64,
        time_base: f64,
        time_per_wind: f64,
    },
    /// Wandering-strip handoff into the center of the target rectangle.
    TubeRouting { shrink: f64, time: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transition {
    pub id: String,
    pub source: String,
    pub target: String,
    pub kind: TransitionKind,
    pub side: SideTag,
    pub domain: SubDomain,
}

/// Maximal transitive sub-dynamics: a set of nodes that is strongly
/// connected under the transitions, with its declared 1-D quotient. The
/// anchor is the section whose first-return map realizes the quotient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitivePiece {
    pub name: String,
    pub anchor: String,
    pub nodes: Vec<String>,
    pub quotient: QuotientSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionGraphModel {
    pub label: String,
    pub nodes: Vec<SectionNode>,
    pub singularities: Vec<Singularity>,
    pub transitions: Vec<Transition>,
    pub pieces: Vec<TransitivePiece>,
}
