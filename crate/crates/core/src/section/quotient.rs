//! One-dimensional quotient maps of the geometric models.

use super::SectionError;
use crate::map1d::{Atom, Branch, Chain, MapError, PiecewiseMap1D};
use serde::{Deserialize, Serialize};

/// `f(x) = sgn(x)(c|x|^α − 1)` on `[−1,1]`: the quotient of the geometric
/// Lorenz return map over its contracting leaves. With `c = 2` the
/// endpoints are expanding fixed repellers (multiplier `c·α`).
pub fn quotient_lorenz_map(c: f64, alpha: f64) -> Result<PiecewiseMap1D, SectionError> {
    if !(c > 1.0 && c <= 2.0) {
        return Err(SectionError::QuotientParams(format!("c={c} outside (1,2]")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SectionError::QuotientParams(format!(
            "alpha={alpha} outside (0,1)"
        )));
    }
    let map = PiecewiseMap1D::new(
        [-1.0, 1.0],
        vec![
            Branch {
                lo: -1.0,
                hi: 0.0,
                chain: Chain(vec![Atom::Power {
                    sign: -1.0,
                    coef: -c,
                    alpha,
                    offset: 1.0,
                }]),
            },
            Branch {
                lo: 0.0,
                hi: 1.0,
                chain: Chain(vec![Atom::Power {
                    sign: 1.0,
                    coef: c,
                    alpha,
                    offset: -1.0,
                }]),
            },
        ],
    )
    .map_err(SectionError::Map)?;
    Ok(map)
}

/// Value and branch index of the truncated winding map on `[0, 1]`:
/// branch k lives on `[s^{−k−1}, s^{−k})` (k = 0..N−1, s = base slope)
/// and maps affinely onto `[0, 1)`; the remainder `[0, s^{−N})` keeps the
/// last branch's slope magnitude, onto `[0, 1)`.
pub fn winding_eval(w: f64, branches: usize, base_slope: f64) -> (f64, usize) {
    debug_assert!((0.0..=1.0).contains(&w));
    let s = base_slope;
    if w <= 0.0 {
        return (0.0, branches);
    }
    let mut k = 0usize;
    let mut hi = 1.0;
    while k < branches {
        let lo = hi / s;
        if w >= lo {
            // affine from [lo, hi) onto [0, 1)
            return ((w - lo) / (hi - lo), k);
        }
        hi = lo;
        k += 1;
    }
    // remainder: slope s^N onto [0, 1)
    (w * s.powi(branches as i32), branches)
}

/// Standalone truncated winding map as a self-map of `[0, 1]` for Ulam
/// analysis: N full branches on geometrically shrinking intervals
/// accumulating at 0, plus the remainder piece.
pub fn winding_map(branches: usize, base_slope: f64) -> Result<PiecewiseMap1D, SectionError> {
    if branches < 2 {
        return Err(SectionError::QuotientParams(format!(
            "winding map needs at least 2 branches, got {branches}"
        )));
    }
    if base_slope < std::f64::consts::SQRT_2 {
        return Err(SectionError::Map(MapError::ExpansionFloor(
            0,
            base_slope,
            std::f64::consts::SQRT_2,
        )));
    }
    let s = base_slope;
    let mut parts = Vec::with_capacity(branches + 1);
    let mut hi = 1.0;
    for _ in 0..branches {
        let lo = hi / s;
        // affine [lo, hi) → [0, 1): slope 1/(hi−lo)
        let a = 1.0 / (hi - lo);
        parts.push(Branch {
            lo,
            hi,
            chain: Chain::affine(a, -a * lo),
        });
        hi = lo;
    }
    // remainder keeps the last branch's slope (s^N for the default s)
    parts.push(Branch {
        lo: 0.0,
        hi,
        chain: Chain::affine(1.0 / hi, 0.0),
    });
    PiecewiseMap1D::new([0.0, 1.0], parts).map_err(SectionError::Map)
}

/// Quotient of the sharp model's lower return map: the passage exit
/// `w = |x|^α` composed with the straddling winding reinjection
/// `x' = 2·W(w) − 1`, an even map with `2(N+1)` full branches on `[−1,1]`.
pub fn lower_winding_quotient(
    branches: usize,
    base_slope: f64,
    alpha: f64,
) -> Result<PiecewiseMap1D, SectionError> {
    let s = base_slope;
    let mut parts = Vec::with_capacity(2 * (branches + 1));
    let push_side = |sign: f64, parts: &mut Vec<Branch>| {
        // branch k of W pulled back through w = |x|^α, then 2W−1
        let mut hi = 1.0_f64;
        for _ in 0..branches {
            let lo = hi / s;
            // x' = 2 (w − lo)/(hi − lo) − 1 = (2/(hi−lo))|x|^α − (2lo/(hi−lo) + 1)
            let a = 2.0 / (hi - lo);
            let chain = Chain(vec![Atom::Power {
                sign,
                coef: a,
                alpha,
                offset: -(a * lo + 1.0),
            }]);
            let (xlo, xhi) = (lo.powf(1.0 / alpha), hi.powf(1.0 / alpha));
            parts.push(if sign > 0.0 {
                Branch {
                    lo: xlo,
                    hi: xhi,
                    chain,
                }
            } else {
                Branch {
                    lo: -xhi,
                    hi: -xlo,
                    chain,
                }
            });
            hi = lo;
        }
        // remainder: x' = 2 s^N |x|^α − 1
        let chain = Chain(vec![Atom::Power {
            sign,
            coef: 2.0 * s.powi(branches as i32),
            alpha,
            offset: -1.0,
        }]);
        let xhi = hi.powf(1.0 / alpha);
        parts.push(if sign > 0.0 {
            Branch {
                lo: 0.0,
                hi: xhi,
                chain,
            }
        } else {
            Branch {
                lo: -xhi,
                hi: 0.0,
                chain,
            }
        });
    };
    push_side(1.0, &mut parts);
    push_side(-1.0, &mut parts);
    PiecewiseMap1D::new([-1.0, 1.0], parts).map_err(SectionError::Map)
}

/// Declarative quotient attached to a transitive piece; `build` produces
/// the interval map the Ulam oracle analyzes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuotientSpec {
    Lorenz { c: f64, alpha: f64 },
    /// Two Lorenz passages per return (the doubled construction).
    LorenzSquared { c: f64, alpha: f64 },
    LowerWinding {
        branches: usize,
        base_slope: f64,
        alpha: f64,
    },
}

impl QuotientSpec {
    pub fn build(&self) -> Result<PiecewiseMap1D, SectionError> {
        match *self {
            QuotientSpec::Lorenz { c, alpha } => quotient_lorenz_map(c, alpha),
            QuotientSpec::LorenzSquared { c, alpha } => {
                let f = quotient_lorenz_map(c, alpha)?;
                f.compose_after(&f).map_err(SectionError::Map)
            }
            QuotientSpec::LowerWinding {
                branches,
                base_slope,
                alpha,
            } => lower_winding_quotient(branches, base_slope, alpha),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_repeller_case() {
        let f = quotient_lorenz_map(2.0, 0.75).unwrap();
        assert!((f.eval(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((f.eval(-1.0).unwrap() + 1.0).abs() < 1e-14);
        assert!((f.deriv(1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!((f.deriv(-1.0).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn interior_case_and_min_slope() {
        let f = quotient_lorenz_map(1.9, 0.75).unwrap();
        assert!((f.eval(1.0).unwrap() - 0.9).abs() < 1e-14);
        // slope minimized at |x| = 1: c·α = 1.425 > √2
        assert!((f.deriv(1.0).unwrap() - 1.425).abs() < 1e-12);
        f.check_expansion(std::f64::consts::SQRT_2).unwrap();
    }

    #[test]
    fn one_sided_limits_at_discontinuity() {
        let f = quotient_lorenz_map(1.9, 0.75).unwrap();
        assert_eq!(f.eval(0.0), None);
        let (right, left) = f.one_sided_limits(0.0);
        assert!((right.unwrap() + 1.0).abs() < 1e-14);
        assert!((left.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn winding_branch_geometry() {
        let w = winding_map(3, 2.0).unwrap();
        // branches sorted by lo: remainder, k=2, k=1, k=0
        assert_eq!(w.branches.len(), 4);
        let b0 = &w.branches[3];
        assert!((b0.lo - 0.5).abs() < 1e-14 && (b0.hi - 1.0).abs() < 1e-14);
        assert!((w.deriv(0.75).unwrap() - 2.0).abs() < 1e-12);
        let b2 = &w.branches[1];
        assert!((b2.lo - 0.125).abs() < 1e-14 && (b2.hi - 0.25).abs() < 1e-14);
        assert!((w.deriv(0.2).unwrap() - 8.0).abs() < 1e-12);
        // remainder keeps the last slope and stays inside [0,1)
        assert!((w.deriv(0.06).unwrap() - 8.0).abs() < 1e-12);
        let img = w.eval(0.1).unwrap();
        assert!((0.0..1.0).contains(&img));
        // every branch is full
        for b in &w.branches {
            let (lo, hi) = b.image();
            assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn winding_eval_matches_map() {
        let m = winding_map(8, 2.0).unwrap();
        for &w in &[0.9, 0.51, 0.3, 0.13, 0.01, 0.003] {
            let (v, _k) = winding_eval(w, 8, 2.0);
            assert!((m.eval(w).unwrap() - v).abs() < 1e-12, "w={w}");
        }
    }

    #[test]
    fn lower_quotient_full_branches() {
        let f = lower_winding_quotient(8, 2.0, 0.75).unwrap();
        assert_eq!(f.branches.len(), 18);
        f.check_expansion(std::f64::consts::SQRT_2).unwrap();
        for b in &f.branches {
            let (lo, hi) = b.image();
            assert!(lo >= -1.0 - 1e-12 && hi <= 1.0 + 1e-12);
            assert!((hi - lo - 2.0).abs() < 1e-9, "branch image [{lo},{hi}]");
        }
        // even map: f(x) = f(−x)
        for &x in &[0.3, 0.55, 0.8, 0.05] {
            assert!((f.eval(x).unwrap() - f.eval(-x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn composed_quotient_matches_double_application() {
        let f = quotient_lorenz_map(1.9, 0.75).unwrap();
        let ff = QuotientSpec::LorenzSquared { c: 1.9, alpha: 0.75 }
            .build()
            .unwrap();
        for &x in &[0.3, -0.62, 0.87, -0.15] {
            let direct = f.eval(f.eval(x).unwrap()).unwrap();
            assert!((ff.eval(x).unwrap() - direct).abs() < 1e-11, "x={x}");
        }
    }
}
