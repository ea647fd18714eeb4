//! Orbit stepping, validation, and first-return maps on section graphs.

use super::passage::{linear_passage, PassageOutcome};
use super::quotient::winding_eval;
use super::{SectionError, SectionGraphModel, SideTag, SubDomain, Transition, TransitionKind};
use crate::geom::Vec3;
use std::collections::HashMap;

/// Resolved-index view of a model for fast stepping.
pub struct ModelRuntime<'a> {
    pub model: &'a SectionGraphModel,
    node_of: HashMap<&'a str, usize>,
    sing_of: HashMap<&'a str, usize>,
    outgoing: Vec<Vec<usize>>,
}

/// One resolved transition application.
#[derive(Debug, Clone)]
pub enum StepOutcome {
    Mapped {
        node: usize,
        point: [f64; 2],
        time: f64,
        transition: usize,
        /// Passage through a singularity, when the transition is one:
        /// `(singularity index, side, |quotient coordinate| at entry)`.
        passage: Option<(usize, SideTag, f64)>,
        /// The transition was a tube routing.
        routed: bool,
    },
    /// Entry on a local stable manifold: the orbit converges to the
    /// singularity.
    Absorbed { singularity: usize },
    /// No transition matched (measure-zero boundary set).
    Stuck,
}

/// One emitted segment of a graph orbit: the 3-D embedded source point
/// carrying `weight` of flow time.
#[derive(Debug, Clone, Copy)]
pub struct GraphOrbitStep {
    pub position: Vec3,
    pub weight: f64,
    pub node: usize,
}

impl<'a> ModelRuntime<'a> {
    pub fn new(model: &'a SectionGraphModel) -> Result<Self, SectionError> {
        let node_of: HashMap<&str, usize> = model
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let sing_of: HashMap<&str, usize> = model
            .singularities
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let mut outgoing = vec![Vec::new(); model.nodes.len()];
        for (ti, tr) in model.transitions.iter().enumerate() {
            let src = *node_of
                .get(tr.source.as_str())
                .ok_or_else(|| SectionError::UnknownRef {
                    transition: tr.id.clone(),
                    what: "node",
                    id: tr.source.clone(),
                })?;
            node_of
                .get(tr.target.as_str())
                .ok_or_else(|| SectionError::UnknownRef {
                    transition: tr.id.clone(),
                    what: "node",
                    id: tr.target.clone(),
                })?;
            if let TransitionKind::LinearPassage { singularity, .. } = &tr.kind {
                sing_of
                    .get(singularity.as_str())
                    .ok_or_else(|| SectionError::UnknownRef {
                        transition: tr.id.clone(),
                        what: "singularity",
                        id: singularity.clone(),
                    })?;
            }
            outgoing[src].push(ti);
        }
        Ok(Self {
            model,
            node_of,
            sing_of,
            outgoing,
        })
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_of.get(id).copied()
    }

    pub fn singularity_index(&self, id: &str) -> Option<usize> {
        self.sing_of.get(id).copied()
    }

    pub fn embed(&self, node: usize, pt: [f64; 2]) -> Vec3 {
        self.model.nodes[node].embed(pt)
    }

    /// Applies the first matching transition at `(node, pt)`.
    pub fn step(&self, node: usize, pt: [f64; 2]) -> StepOutcome {
        for &ti in &self.outgoing[node] {
            let tr = &self.model.transitions[ti];
            if !tr.domain.contains(pt) {
                continue;
            }
            return self.apply(ti, tr, pt);
        }
        // u == 0 on a section with quotient splitting: stable manifold
        if let Some(sing) = self.absorbing_singularity(node) {
            return StepOutcome::Absorbed { singularity: sing };
        }
        StepOutcome::Stuck
    }

    /// When every outgoing transition is a passage split on the quotient
    /// sign, the unmatched set `u = 0` is the local stable manifold.
    fn absorbing_singularity(&self, node: usize) -> Option<usize> {
        for &ti in &self.outgoing[node] {
            if let TransitionKind::LinearPassage { singularity, .. } =
                &self.model.transitions[ti].kind
            {
                return self.sing_of.get(singularity.as_str()).copied();
            }
        }
        None
    }

    fn apply(&self, ti: usize, tr: &Transition, pt: [f64; 2]) -> StepOutcome {
        let target = self.node_of[tr.target.as_str()];
        match &tr.kind {
            TransitionKind::LinearPassage {
                singularity,
                entry_face,
            } => {
                let si = self.sing_of[singularity.as_str()];
                let params = &self.model.singularities[si].params;
                match linear_passage(params, pt[0], pt[1], *entry_face) {
                    PassageOutcome::Absorbed => StepOutcome::Absorbed { singularity: si },
                    PassageOutcome::Exit { exit, time, side } => StepOutcome::Mapped {
                        node: target,
                        point: [exit[1], exit[2]],
                        time,
                        transition: ti,
                        passage: Some((si, side, pt[0].abs())),
                        routed: false,
                    },
                }
            }
            TransitionKind::AffineReinjection {
                sgn,
                c,
                contraction,
                offset,
                time,
            } => StepOutcome::Mapped {
                node: target,
                point: [sgn * (c * pt[1].abs() - 1.0), offset + contraction * pt[0]],
                time: *time,
                transition: ti,
                passage: None,
                routed: false,
            },
            TransitionKind::WindingMap {
                branches,
                base_slope,
                contraction,
                time_base,
                time_per_wind,
            } => {
                let w = pt[1].abs().min(1.0);
                let (val, k) = winding_eval(w, *branches, *base_slope);
                let fiber_offset = if k % 2 == 0 { 0.25 } else { -0.25 };
                StepOutcome::Mapped {
                    node: target,
                    point: [2.0 * val - 1.0, contraction * pt[0] + fiber_offset],
                    time: time_base + k as f64 * time_per_wind,
                    transition: ti,
                    passage: None,
                    routed: false,
                }
            }
            TransitionKind::TubeRouting { shrink, time } => {
                let tgt = &self.model.nodes[target];
                let mid = |b: [f64; 2]| 0.5 * (b[0] + b[1]);
                StepOutcome::Mapped {
                    node: target,
                    point: [
                        mid(tgt.bounds[0]) + shrink * pt[1],
                        mid(tgt.bounds[1]) + shrink * pt[0],
                    ],
                    time: *time,
                    transition: ti,
                    passage: None,
                    routed: true,
                }
            }
        }
    }

    /// Model invariants: reference resolution (done at construction),
    /// image containment on a 64×64 grid per transition, full-measure
    /// outgoing cover per node, strong connectivity of each piece, and
    /// the expansion floor of winding transitions.
    pub fn validate(&self) -> Result<(), SectionError> {
        let m = self.model;
        for (ti, tr) in m.transitions.iter().enumerate() {
            let src = &m.nodes[self.node_of[tr.source.as_str()]];
            let tgt_idx = self.node_of[tr.target.as_str()];
            let tgt = &m.nodes[tgt_idx];
            if let TransitionKind::WindingMap {
                branches,
                base_slope,
                ..
            } = &tr.kind
            {
                super::quotient::winding_map(*branches, *base_slope)?;
            }
            for iu in 0..64 {
                for iv in 0..64 {
                    let u = src.bounds[0][0]
                        + (iu as f64 + 0.5) / 64.0 * (src.bounds[0][1] - src.bounds[0][0]);
                    let v = src.bounds[1][0]
                        + (iv as f64 + 0.5) / 64.0 * (src.bounds[1][1] - src.bounds[1][0]);
                    if !tr.domain.contains([u, v]) {
                        continue;
                    }
                    match self.apply(ti, tr, [u, v]) {
                        StepOutcome::Mapped { point, .. } => {
                            if !tgt.contains(point, 1e-9) {
                                return Err(SectionError::ImageContainment {
                                    transition: tr.id.clone(),
                                    point,
                                });
                            }
                        }
                        StepOutcome::Absorbed { .. } => {}
                        StepOutcome::Stuck => unreachable!(),
                    }
                }
            }
        }
        // outgoing transitions cover each node's rectangle (up to the
        // measure-zero quotient boundary)
        for (ni, node) in m.nodes.iter().enumerate() {
            let mut covered = 0.0;
            let mut strips = 0.0;
            for &ti in &self.outgoing[ni] {
                let d = &m.transitions[ti].domain;
                match d {
                    SubDomain::UStrip { .. } => strips += d.measure_fraction(node.bounds),
                    _ => covered += d.measure_fraction(node.bounds),
                }
            }
            let total = (covered + strips).min(1.0);
            if total < 0.99 {
                return Err(SectionError::CoverGap {
                    node: node.id.clone(),
                    fraction: total,
                });
            }
        }
        // each declared piece is strongly connected
        for piece in &m.pieces {
            let members: Vec<usize> = piece
                .nodes
                .iter()
                .map(|id| {
                    self.node_of
                        .get(id.as_str())
                        .copied()
                        .ok_or_else(|| SectionError::UnknownRef {
                            transition: piece.name.clone(),
                            what: "node",
                            id: id.clone(),
                        })
                })
                .collect::<Result<_, _>>()?;
            if !strongly_connected(&members, |n| {
                self.outgoing[n]
                    .iter()
                    .map(|&ti| self.node_of[m.transitions[ti].target.as_str()])
                    .collect()
            }) {
                return Err(SectionError::NotStronglyConnected(piece.name.clone()));
            }
        }
        Ok(())
    }

    /// First-return map to `node_id`, which must belong to a declared
    /// transitive piece.
    pub fn return_map(&'a self, node_id: &str) -> Result<ReturnMap<'a>, SectionError> {
        let node = self
            .node_index(node_id)
            .ok_or_else(|| SectionError::UnknownRef {
                transition: "return_map".into(),
                what: "node",
                id: node_id.into(),
            })?;
        let piece = self
            .model
            .pieces
            .iter()
            .find(|p| p.nodes.iter().any(|n| n == node_id))
            .ok_or_else(|| SectionError::UnknownRef {
                transition: "return_map".into(),
                what: "piece containing",
                id: node_id.into(),
            })?;
        let piece_nodes = piece
            .nodes
            .iter()
            .map(|id| self.node_of[id.as_str()])
            .collect();
        Ok(ReturnMap {
            runtime: self,
            node,
            piece_nodes,
        })
    }
}

fn strongly_connected(members: &[usize], succ: impl Fn(usize) -> Vec<usize>) -> bool {
    if members.is_empty() {
        return false;
    }
    let inside = |n: usize| members.contains(&n);
    // reachability from each member to every other, within the member set
    for &start in members {
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for t in succ(n) {
                if inside(t) && !seen.contains(&t) {
                    seen.push(t);
                    stack.push(t);
                }
            }
        }
        if seen.len() != members.len() {
            return false;
        }
    }
    true
}

/// First-return transformation on one section node.
pub struct ReturnMap<'a> {
    runtime: &'a ModelRuntime<'a>,
    pub node: usize,
    piece_nodes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum ReturnOutcome {
    Returned {
        point: [f64; 2],
        time: f64,
        /// Transition ids traversed, in order.
        itinerary: Vec<String>,
        /// Passages through singularities: `(index, side, |u| at entry)`.
        passages: Vec<(usize, SideTag, f64)>,
    },
    Absorbed {
        singularity: usize,
    },
    /// A tube routing carried the orbit out of this piece.
    Routed {
        destination: String,
    },
}

const MAX_HOPS: usize = 64;

impl ReturnMap<'_> {
    pub fn eval(&self, pt: [f64; 2]) -> Result<ReturnOutcome, SectionError> {
        let mut node = self.node;
        let mut point = pt;
        let mut time = 0.0;
        let mut itinerary = Vec::new();
        let mut passages = Vec::new();
        for _ in 0..MAX_HOPS {
            match self.runtime.step(node, point) {
                StepOutcome::Mapped {
                    node: next,
                    point: next_pt,
                    time: dt,
                    transition,
                    passage,
                    routed,
                } => {
                    time += dt;
                    itinerary.push(self.runtime.model.transitions[transition].id.clone());
                    if let Some(p) = passage {
                        passages.push(p);
                    }
                    if routed && !self.piece_nodes.contains(&next) {
                        return Ok(ReturnOutcome::Routed {
                            destination: self.runtime.model.nodes[next].id.clone(),
                        });
                    }
                    node = next;
                    point = next_pt;
                    if node == self.node {
                        return Ok(ReturnOutcome::Returned {
                            point,
                            time,
                            itinerary,
                            passages,
                        });
                    }
                }
                StepOutcome::Absorbed { singularity } => {
                    return Ok(ReturnOutcome::Absorbed { singularity })
                }
                StepOutcome::Stuck => {
                    return Ok(ReturnOutcome::Absorbed { singularity: 0 });
                }
            }
        }
        Err(SectionError::NoReturn {
            node: self.runtime.model.nodes[self.node].id.clone(),
            hops: MAX_HOPS,
        })
    }
}
