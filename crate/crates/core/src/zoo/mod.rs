//! The model zoo: one builder per example flow, each with its declared
//! expected census `(s, s_L)`, trapping region, and census seed spec.

mod checks;

pub use checks::{
    connectedness_check, trapping_check, ConnectednessReport, TrappingReport, ZooCheckError,
};

use crate::field::{
    blend, lorenz_classic, suspension_field, BumpPartition, BumpRegion, DiskSuspension, Field3,
    LorenzParams, SpiralContraction, VectorField,
};
use crate::geom::Vec3;
use crate::region::{Box3, Region};
use crate::section::{
    chained_model, double_lorenz_model, geometric_lorenz_model, sharp_single,
    triple_passage_model, SectionGraphModel,
};
use std::sync::Arc;

#[derive(Clone)]
pub enum ModelPayload {
    Ode(Field3),
    Graph(Arc<SectionGraphModel>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedsSpec {
    /// Jittered grid of `per_axis³` seeds over the trapping region.
    OdeGrid { per_axis: usize },
    /// Jittered grid of `count` seeds on every section rectangle.
    PerSection { count: usize },
}

#[derive(Clone)]
pub struct ZooEntry {
    pub label: String,
    pub payload: ModelPayload,
    /// Region whose boundary the flow crosses inward (checked by
    /// [`trapping_check`]); for graph models, the bounding region used for
    /// observable scales.
    pub trapping: Region,
    /// Attractor-membership region for equilibria counting: the
    /// bitorus-style carve-out that excludes non-accumulated saddle-foci.
    pub membership: Region,
    pub s_expected: usize,
    pub s_l_expected: usize,
    pub seeds: SeedsSpec,
    /// Census horizon: flow time for ODE models, return-map iterations for
    /// section graphs.
    pub default_horizon: f64,
    pub default_burn_in: f64,
}

impl ZooEntry {
    pub fn is_ode(&self) -> bool {
        matches!(self.payload, ModelPayload::Ode(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self.payload {
            ModelPayload::Ode(_) => "ode",
            ModelPayload::Graph(_) => "section_graph",
        }
    }

    /// Declared counts satisfy the bound they are meant to exhibit.
    pub fn declaration_consistent(&self) -> bool {
        self.s_l_expected == 0 || self.s_expected <= 2 * self.s_l_expected
    }
}

/// Bounding region of a section-graph model's rectangles, padded a little;
/// sets the observable scales for graph censuses.
fn graph_region(model: &SectionGraphModel) -> Region {
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for node in &model.nodes {
        for &cu in &[node.bounds[0][0], node.bounds[0][1]] {
            for &cv in &[node.bounds[1][0], node.bounds[1][1]] {
                let p = node.embed([cu, cv]);
                for i in 0..3 {
                    min[i] = min[i].min(p[i]);
                    max[i] = max[i].max(p[i]);
                }
            }
        }
    }
    for i in 0..3 {
        min[i] -= 0.5;
        max[i] += 0.5;
    }
    Region::Box(Box3::new(min, max))
}

/// The invariant cylinder `y² + (z−28)² ≤ 29.5²`, `|x| ≤ 29.8` — every
/// boundary point has strictly inward flow for the classic parameters.
fn lorenz_trapping() -> Region {
    Region::Cylinder {
        axis: 0,
        center: [0.0, 28.0],
        radius: 29.5,
        span: [-29.8, 29.8],
    }
}

fn lorenz_membership() -> Region {
    let w = 72.0_f64.sqrt();
    let hole = |sx: f64| {
        Box3::new(
            [sx * w - 1.0, sx * w - 1.0, 26.0],
            [sx * w + 1.0, sx * w + 1.0, 28.0],
        )
    };
    Region::Difference {
        base: Box::new(lorenz_trapping()),
        holes: vec![hole(1.0), hole(-1.0)],
    }
}

/// Suspension flow with a contracting disk flow attached over each of the
/// k+1 sink columns; the blend has unit vertical speed everywhere, hence
/// no equilibria, and k+1 attracting periodic orbits.
pub fn glued_suspension(k: u32) -> Field3 {
    let base = suspension_field(k).expect("k >= 1");
    let attach_radius = 0.3;
    let mut regions = Vec::new();
    let mut fields: Vec<Field3> = vec![base];
    for i in 0..=k as i64 {
        let cx = 2.0 * i as f64 - 0.5;
        regions.push(BumpRegion::BallXY {
            center: [cx, 0.0],
            inner: attach_radius / 2.0,
            outer: attach_radius,
        });
        fields.push(Arc::new(DiskSuspension::new(
            [cx, 0.0],
            attach_radius,
            Arc::new(SpiralContraction::default()),
        )));
    }
    let partition = BumpPartition::with_background(regions).expect("disjoint attachment balls");
    blend(fields, partition).expect("glued suspension blend")
}

fn glued_trapping(k: u32) -> Region {
    Region::Box(
        Box3::new(
            [-0.95, -0.95, 0.0],
            [2.0 * k as f64 - 0.05, 0.95, 1.0],
        )
        .with_periodic(2),
    )
}

fn graph_entry(
    model: SectionGraphModel,
    s_expected: usize,
    s_l_expected: usize,
) -> ZooEntry {
    let region = graph_region(&model);
    ZooEntry {
        label: model.label.clone(),
        trapping: region.clone(),
        membership: region,
        payload: ModelPayload::Graph(Arc::new(model)),
        s_expected,
        s_l_expected,
        seeds: SeedsSpec::PerSection { count: 256 },
        default_horizon: 40_000.0,
        default_burn_in: 2_000.0,
    }
}

/// The zoo. Expected counts are the paper-level declarations the
/// acceptance table is driven by.
pub fn zoo() -> Vec<ZooEntry> {
    let mut entries = vec![
        ZooEntry {
            label: "lorenz_classic".into(),
            payload: ModelPayload::Ode(lorenz_classic(LorenzParams::classic())),
            trapping: lorenz_trapping(),
            membership: lorenz_membership(),
            s_expected: 1,
            s_l_expected: 1,
            seeds: SeedsSpec::OdeGrid { per_axis: 20 },
            default_horizon: 2500.0,
            default_burn_in: 250.0,
        },
        graph_entry(geometric_lorenz_model(1.9), 1, 1),
        graph_entry(double_lorenz_model(), 2, 3),
        graph_entry(sharp_single(0.0), 2, 1),
        graph_entry(chained_model(2, 0.0), 4, 2),
        graph_entry(chained_model(3, 0.0), 6, 3),
    ];
    for k in [1u32, 2] {
        entries.push(ZooEntry {
            label: format!("glued_suspension_{k}"),
            payload: ModelPayload::Ode(glued_suspension(k)),
            trapping: glued_trapping(k),
            membership: glued_trapping(k),
            s_expected: k as usize + 1,
            s_l_expected: 0,
            seeds: SeedsSpec::OdeGrid { per_axis: 20 },
            default_horizon: 600.0,
            default_burn_in: 60.0,
        });
    }
    entries
}

pub fn zoo_entry(label: &str) -> Option<ZooEntry> {
    zoo().into_iter()
        .find(|e| e.label == label)
        .or_else(|| fixtures().into_iter().find(|e| e.label == label))
}

/// Deliberate negative fixtures, reachable by label but excluded from the
/// zoo table (their declared counts violate the bound on purpose).
pub fn fixtures() -> Vec<ZooEntry> {
    let triple = triple_passage_model();
    let triple_region = graph_region(&triple);
    vec![
        ZooEntry {
            label: "fixture_triple_passage".into(),
            trapping: triple_region.clone(),
            membership: triple_region,
            payload: ModelPayload::Graph(Arc::new(triple)),
            s_expected: 3,
            s_l_expected: 1,
            seeds: SeedsSpec::PerSection { count: 256 },
            default_horizon: 40_000.0,
            default_burn_in: 2_000.0,
        },
        ZooEntry {
            label: "fixture_disjoint_pair".into(),
            payload: ModelPayload::Ode(Arc::new(DisjointLorenzPair::default())),
            trapping: Region::Union(vec![
                lorenz_trapping(),
                offset_cylinder(DISJOINT_OFFSET),
            ]),
            membership: Region::Union(vec![
                lorenz_trapping(),
                offset_cylinder(DISJOINT_OFFSET),
            ]),
            s_expected: 2,
            s_l_expected: 2,
            seeds: SeedsSpec::OdeGrid { per_axis: 12 },
            default_horizon: 200.0,
            default_burn_in: 20.0,
        },
    ]
}

const DISJOINT_OFFSET: f64 = 150.0;

fn offset_cylinder(dx: f64) -> Region {
    Region::Cylinder {
        axis: 0,
        center: [0.0, 28.0],
        radius: 29.5,
        span: [dx - 29.8, dx + 29.8],
    }
}

/// Two classical Lorenz copies far apart along x — the deliberately
/// disconnected fixture for `connectedness_check`.
pub struct DisjointLorenzPair {
    inner: Arc<crate::field::LorenzField>,
    offset: f64,
}

impl Default for DisjointLorenzPair {
    fn default() -> Self {
        Self {
            inner: lorenz_classic(LorenzParams::classic()),
            offset: DISJOINT_OFFSET,
        }
    }
}

impl VectorField for DisjointLorenzPair {
    fn domain(&self) -> Box3 {
        Box3::new([-32.0, -32.0, -6.0], [self.offset + 32.0, 32.0, 62.0])
    }

    fn velocity(&self, p: Vec3) -> Vec3 {
        if p[0] < self.offset / 2.0 {
            self.inner.velocity(p)
        } else {
            self.inner.velocity([p[0] - self.offset, p[1], p[2]])
        }
    }

    fn jacobian(&self, p: Vec3) -> crate::geom::Mat3 {
        if p[0] < self.offset / 2.0 {
            self.inner.jacobian(p)
        } else {
            self.inner.jacobian([p[0] - self.offset, p[1], p[2]])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::ModelRuntime;

    #[test]
    fn zoo_has_expected_entries() {
        let z = zoo();
        assert!(z.len() >= 7);
        let get = |label: &str| z.iter().find(|e| e.label == label).unwrap();
        assert_eq!((get("sharp_1").s_expected, get("sharp_1").s_l_expected), (2, 1));
        assert_eq!((get("chained_3").s_expected, get("chained_3").s_l_expected), (6, 3));
        assert_eq!(
            (get("double_lorenz").s_expected, get("double_lorenz").s_l_expected),
            (2, 3)
        );
        assert_eq!(get("glued_suspension_2").s_expected, 3);
        for e in &z {
            assert!(e.declaration_consistent(), "{}", e.label);
        }
    }

    #[test]
    fn trapping_regions_inside_domains() {
        for e in zoo() {
            if let ModelPayload::Ode(f) = &e.payload {
                let bb = e.trapping.bounding_box();
                let dom = f.domain();
                for i in 0..3 {
                    assert!(
                        dom.periodic[i] || (bb.min[i] >= dom.min[i] && bb.max[i] <= dom.max[i]),
                        "{}: axis {i}",
                        e.label
                    );
                }
            }
        }
    }

    #[test]
    fn graph_entries_validate() {
        for e in zoo().into_iter().chain(fixtures()) {
            if let ModelPayload::Graph(m) = &e.payload {
                ModelRuntime::new(m).unwrap().validate().unwrap();
            }
        }
    }

    #[test]
    fn sharp_and_chained_declare_both_sides_per_singularity() {
        use crate::section::{SideTag, TransitionKind};
        for e in zoo() {
            if !(e.label.starts_with("sharp") || e.label.starts_with("chained")) {
                continue;
            }
            let ModelPayload::Graph(m) = &e.payload else {
                continue;
            };
            for s in &m.singularities {
                let mut sides: Vec<SideTag> = m
                    .transitions
                    .iter()
                    .filter(|t| {
                        matches!(&t.kind, TransitionKind::LinearPassage { singularity, .. } if singularity == &s.id)
                    })
                    .map(|t| t.side)
                    .collect();
                sides.sort();
                sides.dedup();
                assert_eq!(
                    sides,
                    vec![SideTag::Top, SideTag::Bottom],
                    "{}: {}",
                    e.label,
                    s.id
                );
            }
        }
    }

    #[test]
    fn glued_field_has_unit_vertical_speed() {
        let f = glued_suspension(2);
        for &p in &[[0.3, 0.2, 0.5], [-0.5, 0.0, 0.1], [3.5, -0.1, 0.9]] {
            assert!((f.velocity(p)[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zoo_graph_payloads_round_trip_bytewise() {
        for e in zoo() {
            if let ModelPayload::Graph(m) = &e.payload {
                let json = serde_json::to_string_pretty(m.as_ref()).unwrap();
                let back: SectionGraphModel = serde_json::from_str(&json).unwrap();
                assert_eq!(json, serde_json::to_string_pretty(&back).unwrap(), "{}", e.label);
            }
        }
    }
}
