//! Piecewise monotone interval maps with exact inverses.
//!
//! Branches are chains of invertible atoms (affine maps and one-sided
//! power laws), so branch images and preimages are computed in closed
//! form — the Ulam discretization assembles bin-to-bin fractions by exact
//! interval arithmetic rather than sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("branch {0} slope {1} below the expansion floor {2}")]
    ExpansionFloor(usize, f64, f64),
    #[error("invalid map: {0}")]
    Invalid(String),
}

/// Invertible monotone atom on an interval of constant sign.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Atom {
    /// `x ↦ a·x + b`, `a ≠ 0`.
    Affine { a: f64, b: f64 },
    /// `x ↦ coef·|x|^alpha + offset` on inputs of sign `sign` (±1).
    Power {
        sign: f64,
        coef: f64,
        alpha: f64,
        offset: f64,
    },
}

impl Atom {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Atom::Affine { a, b } => a * x + b,
            Atom::Power {
                coef,
                alpha,
                offset,
                ..
            } => coef * x.abs().powf(alpha) + offset,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            Atom::Affine { a, .. } => a,
            Atom::Power {
                sign,
                coef,
                alpha,
                ..
            } => sign * coef * alpha * x.abs().powf(alpha - 1.0),
        }
    }

    pub fn invert(&self, y: f64) -> f64 {
        match *self {
            Atom::Affine { a, b } => (y - b) / a,
            Atom::Power {
                sign,
                coef,
                alpha,
                offset,
            } => {
                let t = ((y - offset) / coef).max(0.0);
                sign * t.powf(1.0 / alpha)
            }
        }
    }
}

/// Composition of atoms applied left to right.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Chain(pub Vec<Atom>);

impl Chain {
    pub fn affine(a: f64, b: f64) -> Self {
        Chain(vec![Atom::Affine { a, b }])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().fold(x, |v, atom| atom.eval(v))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let mut v = x;
        let mut d = 1.0;
        for atom in &self.0 {
            d *= atom.deriv(v);
            v = atom.eval(v);
        }
        d
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.0.iter().rev().fold(y, |v, atom| atom.invert(v))
    }

    pub fn then(&self, other: &Chain) -> Chain {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().copied());
        Chain(atoms)
    }
}

/// One monotone branch on `[lo, hi)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub lo: f64,
    pub hi: f64,
    pub chain: Chain,
}

impl Branch {
    /// Image endpoints in increasing order.
    pub fn image(&self) -> (f64, f64) {
        let a = self.chain.eval(self.lo);
        let b = self.chain.eval(self.hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn increasing(&self) -> bool {
        self.chain.eval(self.lo) <= self.chain.eval(self.hi)
    }

    fn min_abs_slope(&self) -> f64 {
        // slope extrema of power chains sit at the interval ends; a short
        // interior scan guards composite branches
        let mut m = f64::INFINITY;
        for k in 0..=16 {
            let x = self.lo + (self.hi - self.lo) * k as f64 / 16.0;
            let x = x.clamp(self.lo, self.hi);
            let d = self.chain.deriv(x).abs();
            if d.is_finite() {
                m = m.min(d);
            }
        }
        m
    }
}

/// Piecewise monotone map: branches with pairwise-disjoint intervals whose
/// union covers the domain up to finitely many points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseMap1D {
    pub domain: [f64; 2],
    pub branches: Vec<Branch>,
}

impl PiecewiseMap1D {
    pub fn new(domain: [f64; 2], mut branches: Vec<Branch>) -> Result<Self, MapError> {
        if branches.is_empty() || domain[0] >= domain[1] {
            return Err(MapError::Invalid("empty map".into()));
        }
        branches.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let tol = 1e-9 * (domain[1] - domain[0]);
        let mut cover = 0.0;
        for (i, br) in branches.iter().enumerate() {
            if br.hi <= br.lo {
                return Err(MapError::Invalid(format!("branch {i} degenerate")));
            }
            if i + 1 < branches.len() && br.hi > branches[i + 1].lo + tol {
                return Err(MapError::Invalid(format!("branches {i},{} overlap", i + 1)));
            }
            cover += br.hi - br.lo;
        }
        if (cover - (domain[1] - domain[0])).abs() > tol {
            return Err(MapError::Invalid(format!(
                "branches cover {cover} of domain length {}",
                domain[1] - domain[0]
            )));
        }
        Ok(Self { domain, branches })
    }

    pub fn check_expansion(&self, floor: f64) -> Result<(), MapError> {
        for (i, br) in self.branches.iter().enumerate() {
            let m = br.min_abs_slope();
            if m < floor {
                return Err(MapError::ExpansionFloor(i, m, floor));
            }
        }
        Ok(())
    }

    /// Branch index containing `x`; `None` on a discontinuity point or gap.
    pub fn branch_of(&self, x: f64) -> Option<usize> {
        self.branches
            .iter()
            .position(|b| x >= b.lo && x < b.hi)
            .or_else(|| {
                // the right domain endpoint belongs to the last branch
                (x == self.domain[1]).then_some(self.branches.len() - 1)
            })
    }

    /// Evaluates the map; `None` marks a discontinuity (e.g. the Lorenz
    /// map at 0).
    pub fn eval(&self, x: f64) -> Option<f64> {
        // exact branch endpoints shared by two branches are discontinuities
        let interior = self
            .branches
            .iter()
            .any(|b| x > b.lo && x < b.hi);
        if !interior && self.branches.iter().filter(|b| x == b.lo || x == b.hi).count() > 1 {
            return None;
        }
        Some(self.branches[self.branch_of(x)?].chain.eval(x))
    }

    pub fn deriv(&self, x: f64) -> Option<f64> {
        Some(self.branches[self.branch_of(x)?].chain.deriv(x))
    }

    /// One-sided limits at an interior point `(from the right, from the left)`.
    pub fn one_sided_limits(&self, x: f64) -> (Option<f64>, Option<f64>) {
        let right = self
            .branches
            .iter()
            .find(|b| x >= b.lo - 1e-15 && x < b.hi)
            .map(|b| b.chain.eval(x));
        let left = self
            .branches
            .iter()
            .find(|b| x > b.lo && x <= b.hi + 1e-15)
            .map(|b| b.chain.eval(x));
        (right, left)
    }

    /// Orbit of `x` (skipping the seed), stopping early at a discontinuity.
    pub fn iterate(&self, x: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut v = x;
        for _ in 0..n {
            match self.eval(v) {
                Some(next) => {
                    v = next.clamp(self.domain[0], self.domain[1]);
                    out.push(v);
                }
                None => break,
            }
        }
        out
    }

    /// Composite map `self ∘ first` (apply `first`, then `self`), with the
    /// branch partition refined through `first`'s inverses.
    pub fn compose_after(&self, first: &PiecewiseMap1D) -> Result<PiecewiseMap1D, MapError> {
        let mut branches = Vec::new();
        for b1 in &first.branches {
            let (img_lo, img_hi) = b1.image();
            // breakpoints of `self` inside the image of b1
            let mut cuts: Vec<f64> = vec![img_lo, img_hi];
            for b2 in &self.branches {
                for edge in [b2.lo, b2.hi] {
                    if edge > img_lo && edge < img_hi {
                        cuts.push(edge);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            for w in cuts.windows(2) {
                let (ylo, yhi) = (w[0], w[1]);
                let ymid = 0.5 * (ylo + yhi);
                let Some(i2) = self.branch_of(ymid) else {
                    continue;
                };
                // pull the y-interval back through b1
                let (mut xa, mut xb) = (b1.chain.invert(ylo), b1.chain.invert(yhi));
                if xa > xb {
                    std::mem::swap(&mut xa, &mut xb);
                }
                let xa = xa.max(b1.lo);
                let xb = xb.min(b1.hi);
                if xb - xa <= 1e-15 * (first.domain[1] - first.domain[0]) {
                    continue;
                }
                branches.push(Branch {
                    lo: xa,
                    hi: xb,
                    chain: b1.chain.then(&self.branches[i2].chain),
                });
            }
        }
        PiecewiseMap1D::new(first.domain, branches)
    }
}

/// Doubling map `x ↦ 2x mod 1` (test fixture).
pub fn doubling_map() -> PiecewiseMap1D {
    PiecewiseMap1D::new(
        [0.0, 1.0],
        vec![
            Branch {
                lo: 0.0,
                hi: 0.5,
                chain: Chain::affine(2.0, 0.0),
            },
            Branch {
                lo: 0.5,
                hi: 1.0,
                chain: Chain::affine(2.0, -1.0),
            },
        ],
    )
    .unwrap()
}

/// Two independent doubling maps on `[0, ½)` and `[½, 1]` — the
/// block-diagonal two-component fixture.
pub fn two_block_doubling() -> PiecewiseMap1D {
    PiecewiseMap1D::new(
        [0.0, 1.0],
        vec![
            Branch {
                lo: 0.0,
                hi: 0.25,
                chain: Chain::affine(2.0, 0.0),
            },
            Branch {
                lo: 0.25,
                hi: 0.5,
                chain: Chain::affine(2.0, -0.5),
            },
            Branch {
                lo: 0.5,
                hi: 0.75,
                chain: Chain::affine(2.0, -0.5),
            },
            Branch {
                lo: 0.75,
                hi: 1.0,
                chain: Chain::affine(2.0, -1.0),
            },
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_invert() {
        let a = Atom::Affine { a: -3.0, b: 1.0 };
        assert!((a.invert(a.eval(0.37)) - 0.37).abs() < 1e-14);
        let p = Atom::Power {
            sign: -1.0,
            coef: 1.9,
            alpha: 0.75,
            offset: 1.0,
        };
        let x = -0.42;
        assert!((p.invert(p.eval(x)) - x).abs() < 1e-14);
    }

    #[test]
    fn doubling_map_basics() {
        let f = doubling_map();
        assert!((f.eval(0.2).unwrap() - 0.4).abs() < 1e-12);
        assert!((f.eval(0.7).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(f.eval(0.5), None); // shared endpoint is a discontinuity
        assert_eq!(f.branch_of(1.0), Some(1));
    }

    #[test]
    fn compose_refines_breakpoints() {
        let f = doubling_map();
        let ff = f.compose_after(&f).unwrap();
        assert_eq!(ff.branches.len(), 4);
        for &x in &[0.1, 0.2, 0.3, 0.6, 0.9] {
            let direct = f.eval(f.eval(x).unwrap()).unwrap();
            let composed = ff.eval(x).unwrap();
            assert!((direct - composed).abs() < 1e-12, "x={x}");
        }
        // chain rule: derivative of the composition is 4 everywhere
        assert!((ff.deriv(0.1).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_floor_enforced() {
        let weak = PiecewiseMap1D::new(
            [0.0, 1.0],
            vec![Branch {
                lo: 0.0,
                hi: 1.0,
                chain: Chain::affine(1.2, 0.0),
            }],
        )
        .unwrap();
        assert!(weak.check_expansion(std::f64::consts::SQRT_2).is_err());
    }
}
