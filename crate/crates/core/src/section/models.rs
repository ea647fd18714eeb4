//! Builders for the geometric section-graph models.
//!
//! Transition order matters where domains overlap: the runtime applies the
//! first matching transition, so wandering strips are declared before the
//! passages they carve out of.

use super::quotient::QuotientSpec;
use super::{
    LinearSaddleParams, SectionGraphModel, SectionNode, SideTag, Singularity, SubDomain,
    Transition, TransitionKind, TransitivePiece,
};
use crate::geom::Vec3;

const FIBER_CONTRACTION: f64 = 0.25;
const REINJECTION_TIME: f64 = 1.0;
const ALPHA: f64 = 0.75;

fn section(id: &str, axis: usize, origin: Vec3, bounds: [[f64; 2]; 2], q: usize) -> SectionNode {
    SectionNode {
        id: id.into(),
        axis,
        origin,
        bounds,
        quotient_coord: q,
    }
}

fn passage(id: &str, source: &str, target: &str, sing: &str, face: i8, domain: SubDomain) -> Transition {
    Transition {
        id: id.into(),
        source: source.into(),
        target: target.into(),
        kind: TransitionKind::LinearPassage {
            singularity: sing.into(),
            entry_face: face,
        },
        side: if face > 0 { SideTag::Top } else { SideTag::Bottom },
        domain,
    }
}

fn reinjection(id: &str, source: &str, target: &str, sgn: f64, c: f64, domain: SubDomain) -> Transition {
    Transition {
        id: id.into(),
        source: source.into(),
        target: target.into(),
        kind: TransitionKind::AffineReinjection {
            sgn,
            c,
            contraction: FIBER_CONTRACTION,
            offset: 0.5 * sgn,
            time: REINJECTION_TIME,
        },
        side: SideTag::None,
        domain,
    }
}

/// Plain geometric Lorenz model: one singularity, the global section S on
/// top, two exit faces, affine reinjection. The quotient of the return map
/// to S is exactly `sgn(x)(c|x|^α − 1)`.
pub fn geometric_lorenz_model(c: f64) -> SectionGraphModel {
    SectionGraphModel {
        label: "geometric_lorenz".into(),
        nodes: vec![
            section("S", 2, [0.0, 0.0, 1.0], [[-1.0, 1.0], [-1.0, 1.0]], 0),
            section("Fp", 0, [1.0, 0.0, 0.0], [[-1.0, 1.0], [0.0, 1.0]], 1),
            section("Fm", 0, [-1.0, 0.0, 0.0], [[-1.0, 1.0], [0.0, 1.0]], 1),
        ],
        singularities: vec![Singularity {
            id: "sigma0".into(),
            location: [0.0, 0.0, 0.0],
            params: LinearSaddleParams::standard(),
        }],
        transitions: vec![
            passage("S_right", "S", "Fp", "sigma0", 1, SubDomain::UPositive),
            passage("S_left", "S", "Fm", "sigma0", 1, SubDomain::UNegative),
            reinjection("Fp_back", "Fp", "S", 1.0, c, SubDomain::All),
            reinjection("Fm_back", "Fm", "S", -1.0, c, SubDomain::All),
        ],
        pieces: vec![TransitivePiece {
            name: "core".into(),
            anchor: "S".into(),
            nodes: vec!["S".into(), "Fp".into(), "Fm".into()],
            quotient: QuotientSpec::Lorenz { c, alpha: ALPHA },
        }],
    }
}

/// One sharp-equality block: boundary-repeller geometric Lorenz on top
/// (c = 2) plus the lower piece whose return to S⁻ passes the singularity
/// from below and reinjects through the truncated winding map. The strip
/// `[1−rho, 1)` of S hands orbits to `tube_dest` (the same S realizes the
/// self-connection choice).
pub fn sharp_model(
    label: &str,
    prefix: &str,
    origin: Vec3,
    winding_branches: usize,
    rho_tube: f64,
    tube_dest: &str,
) -> SectionGraphModel {
    let o = origin;
    let id = |suffix: &str| format!("{prefix}{suffix}");
    let sig = id("sigma");
    let nodes = vec![
        section(&id("S"), 2, [o[0], o[1], o[2] + 1.0], [[-1.0, 1.0], [-1.0, 1.0]], 0),
        section(&id("Sm"), 2, [o[0], o[1], o[2] - 1.0], [[-1.0, 1.0], [-1.0, 1.0]], 0),
        section(&id("Fp"), 0, [o[0] + 1.0, o[1], o[2]], [[-1.0, 1.0], [-1.0, 1.0]], 1),
        section(&id("Fm"), 0, [o[0] - 1.0, o[1], o[2]], [[-1.0, 1.0], [-1.0, 1.0]], 1),
    ];
    let winding = |tid: &str, source: &str| Transition {
        id: id(tid),
        source: source.into(),
        target: id("Sm"),
        kind: TransitionKind::WindingMap {
            branches: winding_branches,
            base_slope: 2.0,
            contraction: FIBER_CONTRACTION,
            time_base: 1.0,
            time_per_wind: 0.5,
        },
        side: SideTag::None,
        domain: SubDomain::VNegative,
    };
    let transitions = vec![
        // wandering strip first so it wins over the passage when rho > 0
        Transition {
            id: id("tube"),
            source: id("S"),
            target: tube_dest.into(),
            kind: TransitionKind::TubeRouting {
                shrink: 0.1,
                time: 2.0,
            },
            side: SideTag::None,
            domain: SubDomain::UStrip {
                lo: 1.0 - rho_tube,
                hi: 1.0,
            },
        },
        passage(&id("S_right"), &id("S"), &id("Fp"), &sig, 1, SubDomain::UPositive),
        passage(&id("S_left"), &id("S"), &id("Fm"), &sig, 1, SubDomain::UNegative),
        passage(&id("Sm_right"), &id("Sm"), &id("Fp"), &sig, -1, SubDomain::UPositive),
        passage(&id("Sm_left"), &id("Sm"), &id("Fm"), &sig, -1, SubDomain::UNegative),
        reinjection(&id("Fp_up"), &id("Fp"), &id("S"), 1.0, 2.0, SubDomain::VPositive),
        reinjection(&id("Fm_up"), &id("Fm"), &id("S"), -1.0, 2.0, SubDomain::VPositive),
        winding("Fp_down", &id("Fp")),
        winding("Fm_down", &id("Fm")),
    ];
    SectionGraphModel {
        label: label.into(),
        nodes,
        singularities: vec![Singularity {
            id: sig.clone(),
            location: o,
            params: LinearSaddleParams::standard(),
        }],
        transitions,
        pieces: vec![
            TransitivePiece {
                name: id("upper"),
                anchor: id("S"),
                nodes: vec![id("S"), id("Fp"), id("Fm")],
                quotient: QuotientSpec::Lorenz { c: 2.0, alpha: ALPHA },
            },
            TransitivePiece {
                name: id("lower"),
                anchor: id("Sm"),
                nodes: vec![id("Sm"), id("Fp"), id("Fm")],
                quotient: QuotientSpec::LowerWinding {
                    branches: winding_branches,
                    base_slope: 2.0,
                    alpha: ALPHA,
                },
            },
        ],
    }
}

/// Single sharp block with the self-connecting tube (choice (i)).
pub fn sharp_single(rho_tube: f64) -> SectionGraphModel {
    sharp_model("sharp_1", "", [0.0, 0.0, 0.0], 8, rho_tube, "S")
}

/// Doubled construction: two Lorenz-type transitive pieces above and
/// below, sharing the middle singularity record with opposite side tags;
/// each piece also passes through its own singularity, so the attracting
/// set carries three Lorenz-like singularities but only two measures.
pub fn double_lorenz_model() -> SectionGraphModel {
    let c = 1.9;
    let nodes = vec![
        section("SA", 2, [0.0, 0.0, 3.5], [[-1.0, 1.0], [-1.0, 1.0]], 0),
        section("FAp", 0, [1.0, 0.0, 2.5], [[-1.0, 1.0], [0.0, 1.0]], 1),
        section("FAm", 0, [-1.0, 0.0, 2.5], [[-1.0, 1.0], [0.0, 1.0]], 1),
        section("SMa", 2, [0.0, 0.0, 1.0], [[-1.0, 1.0], [-1.0, 1.0]], 0),
        section("FMp", 0, [1.0, 0.0, 0.0], [[-1.0, 1.0], [-1.0, 1.0]], 1),
        section("FMm", 0, [-1.0, 0.0, 0.0], [[-1.0, 1.0], [-1.0, 1.0]], 1),
        section("SMb", 2, [0.0, 0.0, -1.0], [[-1.0, 1.0], [-1.0, 1.0]], 0),
        section("SB", 2, [0.0, 0.0, -3.5], [[-1.0, 1.0], [-1.0, 1.0]], 0),
        section("FBp", 0, [1.0, 0.0, -2.5], [[-1.0, 1.0], [-1.0, 0.0]], 1),
        section("FBm", 0, [-1.0, 0.0, -2.5], [[-1.0, 1.0], [-1.0, 0.0]], 1),
    ];
    let sing = |id: &str, z: f64| Singularity {
        id: id.into(),
        location: [0.0, 0.0, z],
        params: LinearSaddleParams::standard(),
    };
    let transitions = vec![
        passage("SA_right", "SA", "FAp", "sigma_top", 1, SubDomain::UPositive),
        passage("SA_left", "SA", "FAm", "sigma_top", 1, SubDomain::UNegative),
        reinjection("FAp_mid", "FAp", "SMa", 1.0, c, SubDomain::All),
        reinjection("FAm_mid", "FAm", "SMa", -1.0, c, SubDomain::All),
        passage("SMa_right", "SMa", "FMp", "sigma_mid", 1, SubDomain::UPositive),
        passage("SMa_left", "SMa", "FMm", "sigma_mid", 1, SubDomain::UNegative),
        reinjection("FMp_up", "FMp", "SA", 1.0, c, SubDomain::VPositive),
        reinjection("FMm_up", "FMm", "SA", -1.0, c, SubDomain::VPositive),
        passage("SB_right", "SB", "FBp", "sigma_bot", -1, SubDomain::UPositive),
        passage("SB_left", "SB", "FBm", "sigma_bot", -1, SubDomain::UNegative),
        reinjection("FBp_mid", "FBp", "SMb", 1.0, c, SubDomain::All),
        reinjection("FBm_mid", "FBm", "SMb", -1.0, c, SubDomain::All),
        passage("SMb_right", "SMb", "FMp", "sigma_mid", -1, SubDomain::UPositive),
        passage("SMb_left", "SMb", "FMm", "sigma_mid", -1, SubDomain::UNegative),
        reinjection("FMp_dn", "FMp", "SB", 1.0, c, SubDomain::VNegative),
        reinjection("FMm_dn", "FMm", "SB", -1.0, c, SubDomain::VNegative),
    ];
    let piece = |name: &str, anchor: &str, members: &[&str]| TransitivePiece {
        name: name.into(),
        anchor: anchor.into(),
        nodes: members.iter().map(|s| s.to_string()).collect(),
        quotient: QuotientSpec::LorenzSquared { c, alpha: ALPHA },
    };
    SectionGraphModel {
        label: "double_lorenz".into(),
        nodes,
        singularities: vec![
            sing("sigma_top", 2.5),
            sing("sigma_mid", 0.0),
            sing("sigma_bot", -2.5),
        ],
        transitions,
        pieces: vec![
            piece("upper", "SA", &["SA", "FAp", "FAm", "SMa", "FMp", "FMm"]),
            piece("lower", "SB", &["SB", "FBp", "FBm", "SMb", "FMp", "FMm"]),
        ],
    }
}

/// Chain of `k` sharp blocks at the §2.4 locations `x = 40i − 5`; block i
/// routes its wandering strip to block i+1's top section, the last block
/// self-connects.
pub fn chained_model(k: usize, rho_tube: f64) -> SectionGraphModel {
    assert!(k >= 1);
    let mut nodes = Vec::new();
    let mut singularities = Vec::new();
    let mut transitions = Vec::new();
    let mut pieces = Vec::new();
    for i in 0..k {
        let prefix = format!("c{i}_");
        let dest = if i + 1 < k {
            format!("c{}_S", i + 1)
        } else {
            format!("c{i}_S")
        };
        let block = sharp_model(
            "block",
            &prefix,
            [40.0 * i as f64 - 5.0, 0.0, 0.0],
            8,
            rho_tube,
            &dest,
        );
        nodes.extend(block.nodes);
        singularities.extend(block.singularities);
        transitions.extend(block.transitions);
        pieces.extend(block.pieces);
    }
    SectionGraphModel {
        label: format!("chained_{k}"),
        nodes,
        singularities,
        transitions,
        pieces,
    }
}

/// Deliberately non-realizable negative fixture: three disjoint transitive
/// loops all passing through one singularity record (sides top, bottom,
/// top), so the measured census violates the two-per-singularity bound.
pub fn triple_passage_model() -> SectionGraphModel {
    let c = 1.9;
    let mut nodes = Vec::new();
    let mut transitions = Vec::new();
    let mut pieces = Vec::new();
    for (j, face) in [(0usize, 1i8), (1, -1), (2, 1)] {
        let sid = format!("S{j}");
        let fp = format!("Fp{j}");
        let fm = format!("Fm{j}");
        let x0 = 8.0 * j as f64;
        let vband = if face > 0 { [0.0, 1.0] } else { [-1.0, 0.0] };
        nodes.push(section(&sid, 2, [x0, 0.0, f64::from(face)], [[-1.0, 1.0], [-1.0, 1.0]], 0));
        nodes.push(section(&fp, 0, [x0 + 1.0, 0.0, 0.0], [[-1.0, 1.0], vband], 1));
        nodes.push(section(&fm, 0, [x0 - 1.0, 0.0, 0.0], [[-1.0, 1.0], vband], 1));
        transitions.push(passage(
            &format!("S{j}_right"),
            &sid,
            &fp,
            "sigma0",
            face,
            SubDomain::UPositive,
        ));
        transitions.push(passage(
            &format!("S{j}_left"),
            &sid,
            &fm,
            "sigma0",
            face,
            SubDomain::UNegative,
        ));
        transitions.push(reinjection(&format!("Fp{j}_back"), &fp, &sid, 1.0, c, SubDomain::All));
        transitions.push(reinjection(&format!("Fm{j}_back"), &fm, &sid, -1.0, c, SubDomain::All));
        pieces.push(TransitivePiece {
            name: format!("loop{j}"),
            anchor: sid.clone(),
            nodes: vec![sid, fp, fm],
            quotient: QuotientSpec::Lorenz { c, alpha: ALPHA },
        });
    }
    SectionGraphModel {
        label: "fixture_triple_passage".into(),
        nodes,
        singularities: vec![Singularity {
            id: "sigma0".into(),
            location: [0.0, 0.0, 0.0],
            params: LinearSaddleParams::standard(),
        }],
        transitions,
        pieces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::{ModelRuntime, ReturnOutcome};

    #[test]
    fn all_models_validate() {
        for model in [
            geometric_lorenz_model(1.9),
            sharp_single(0.0),
            double_lorenz_model(),
            chained_model(2, 0.0),
            chained_model(3, 0.0),
            triple_passage_model(),
        ] {
            let rt = ModelRuntime::new(&model).unwrap();
            rt.validate().unwrap_or_else(|e| panic!("{}: {e}", model.label));
        }
    }

    #[test]
    fn geometric_lorenz_return_projects_to_quotient() {
        let model = geometric_lorenz_model(1.9);
        let rt = ModelRuntime::new(&model).unwrap();
        let rmap = rt.return_map("S").unwrap();
        let f = quotient_map(&model, "core");
        for i in 0..1000 {
            let u = -0.999 + 1.998 * (i as f64 + 0.5) / 1000.0;
            if u.abs() < 1e-6 {
                continue;
            }
            let v = 0.3 * ((i * 37) % 7) as f64 / 7.0 - 0.15;
            match rmap.eval([u, v]).unwrap() {
                ReturnOutcome::Returned { point, passages, .. } => {
                    let expected = f.eval(u).unwrap();
                    assert!(
                        (point[0] - expected).abs() < 1e-10,
                        "u={u}: {} vs {expected}",
                        point[0]
                    );
                    assert_eq!(passages.len(), 1);
                    assert_eq!(passages[0].1, crate::section::SideTag::Top);
                }
                other => panic!("u={u}: {other:?}"),
            }
        }
    }

    fn quotient_map(model: &SectionGraphModel, piece: &str) -> crate::map1d::PiecewiseMap1D {
        model
            .pieces
            .iter()
            .find(|p| p.name == piece)
            .unwrap()
            .quotient
            .build()
            .unwrap()
    }

    #[test]
    fn stable_manifold_absorbs() {
        let model = geometric_lorenz_model(1.9);
        let rt = ModelRuntime::new(&model).unwrap();
        let rmap = rt.return_map("S").unwrap();
        assert!(matches!(
            rmap.eval([0.0, 0.2]).unwrap(),
            ReturnOutcome::Absorbed { .. }
        ));
    }

    #[test]
    fn sharp_lower_returns_with_bottom_tag() {
        let model = sharp_single(0.0);
        let rt = ModelRuntime::new(&model).unwrap();
        let rmap = rt.return_map("Sm").unwrap();
        let f = quotient_map(&model, "lower");
        for &u in &[0.7, -0.4, 0.2, 0.05, -0.93] {
            match rmap.eval([u, 0.1]).unwrap() {
                ReturnOutcome::Returned { point, passages, .. } => {
                    assert_eq!(passages.len(), 1);
                    assert_eq!(passages[0].1, crate::section::SideTag::Bottom);
                    let expected = f.eval(u).unwrap();
                    assert!(
                        (point[0] - expected).abs() < 1e-10,
                        "u={u}: {} vs {expected}",
                        point[0]
                    );
                }
                other => panic!("u={u}: {other:?}"),
            }
        }
    }

    #[test]
    fn sharp_upper_boundary_fixed_point() {
        // c = 2: the section boundary x = 1 is fixed under the return map
        let model = sharp_single(0.0);
        let rt = ModelRuntime::new(&model).unwrap();
        let rmap = rt.return_map("S").unwrap();
        match rmap.eval([1.0, 0.0]).unwrap() {
            ReturnOutcome::Returned { point, .. } => {
                assert!((point[0] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tube_routing_marks_routed_orbits() {
        // rho > 0: strip orbits leave the chained block for the next one
        let model = chained_model(2, 0.05);
        let rt = ModelRuntime::new(&model).unwrap();
        let rmap = rt.return_map("c0_S").unwrap();
        match rmap.eval([0.999, 0.0]).unwrap() {
            ReturnOutcome::Routed { destination } => assert_eq!(destination, "c1_S"),
            other => panic!("{other:?}"),
        }
        // last block self-connects: routed orbits stay in the piece
        let rmap = rt.return_map("c1_S").unwrap();
        assert!(matches!(
            rmap.eval([0.999, 0.0]).unwrap(),
            ReturnOutcome::Returned { .. }
        ));
    }

    #[test]
    fn double_lorenz_composes_two_passages() {
        let model = double_lorenz_model();
        let rt = ModelRuntime::new(&model).unwrap();
        let rmap = rt.return_map("SA").unwrap();
        let ff = quotient_map(&model, "upper");
        for &u in &[0.6, -0.35, 0.81] {
            match rmap.eval([u, 0.0]).unwrap() {
                ReturnOutcome::Returned { point, passages, .. } => {
                    assert_eq!(passages.len(), 2);
                    let sings: Vec<usize> = passages.iter().map(|p| p.0).collect();
                    assert!(sings.contains(&0) && sings.contains(&1)); // own + shared
                    let expected = ff.eval(u).unwrap();
                    assert!((point[0] - expected).abs() < 1e-10, "u={u}");
                }
                other => panic!("u={u}: {other:?}"),
            }
        }
    }

    #[test]
    fn models_serialize_round_trip() {
        let model = chained_model(2, 0.0);
        let json = serde_json::to_string_pretty(&model).unwrap();
        let back: SectionGraphModel = serde_json::from_str(&json).unwrap();
        let json2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, json2);
    }
}
