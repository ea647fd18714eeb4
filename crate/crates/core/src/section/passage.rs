//! Closed-form passage through a linear Lorenz-like saddle.
//!
//! In the local cube `[-1,1]³` the flow is `diag(λ1, λ2, λ3)` with
//! `λ2 < λ3 < 0 < −λ3 < λ1`. A point entering on the face `z = ±1` with
//! `x ≠ 0` leaves through `x = sgn(x)` after time `ln(1/|x|)/λ1`, at
//! `(sgn x, y·|x|^β, z_face·|x|^α)` with `α = −λ3/λ1 ∈ (0,1)` and
//! `β = −λ2/λ1 > 1`. No integration is involved.

use super::{SectionError, SideTag};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSaddleParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl LinearSaddleParams {
    const MARGIN: f64 = 1e-10;

    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self, SectionError> {
        let ok = lambda2 < lambda3 - Self::MARGIN
            && lambda3 < -Self::MARGIN
            && -lambda3 < lambda1 - Self::MARGIN;
        if !ok {
            return Err(SectionError::SaddleParams {
                lambda1,
                lambda2,
                lambda3,
            });
        }
        Ok(Self {
            lambda1,
            lambda2,
            lambda3,
        })
    }

    /// Exit exponent of the weak-stable coordinate, in (0, 1).
    pub fn alpha(&self) -> f64 {
        -self.lambda3 / self.lambda1
    }

    /// Exit exponent of the strong-stable coordinate, > 1.
    pub fn beta(&self) -> f64 {
        -self.lambda2 / self.lambda1
    }

    /// Params with α = 3/4 used by the geometric models of the zoo.
    pub fn standard() -> Self {
        Self::new(2.0, -6.0, -1.5).expect("standard params valid")
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PassageOutcome {
    Exit {
        /// Local coordinates `(sgn x, y', z')` on the exit face.
        exit: [f64; 3],
        time: f64,
        side: SideTag,
    },
    /// Entry on the local stable manifold (`x = 0`): the orbit converges
    /// to the singularity.
    Absorbed,
}

/// Maps an entry point `(x, y)` on the face `z = z_face` (±1) through the
/// saddle. Preconditions: `|x| ≤ 1`, `|y| ≤ 1`, `z_face = ±1`.
pub fn linear_passage(p: &LinearSaddleParams, x: f64, y: f64, z_face: i8) -> PassageOutcome {
    debug_assert!(x.abs() <= 1.0 + 1e-12 && y.abs() <= 1.0 + 1e-12);
    debug_assert!(z_face == 1 || z_face == -1);
    if x == 0.0 {
        return PassageOutcome::Absorbed;
    }
    let ax = x.abs();
    let time = (1.0 / ax).ln() / p.lambda1;
    let exit = [
        x.signum(),
        y * ax.powf(p.beta()),
        f64::from(z_face) * ax.powf(p.alpha()),
    ];
    let side = if z_face > 0 {
        SideTag::Top
    } else {
        SideTag::Bottom
    };
    PassageOutcome::Exit { exit, time, side }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_params() -> LinearSaddleParams {
        LinearSaddleParams::new(2.0, -6.0, -1.0).unwrap()
    }

    #[test]
    fn worked_example() {
        let p = example_params();
        assert_eq!(p.alpha(), 0.5);
        assert_eq!(p.beta(), 3.0);
        match linear_passage(&p, 0.25, 0.5, 1) {
            PassageOutcome::Exit { exit, time, side } => {
                assert_eq!(exit[0], 1.0);
                assert!((exit[1] - 1.0 / 128.0).abs() < 1e-15);
                assert!((exit[2] - 0.5).abs() < 1e-15);
                assert!((time - 4.0_f64.ln() / 2.0).abs() < 1e-15);
                assert_eq!(side, SideTag::Top);
            }
            _ => panic!("expected exit"),
        }
    }

    #[test]
    fn invariant_plane_y_zero() {
        let p = example_params();
        for &x in &[0.1, -0.4, 0.9] {
            match linear_passage(&p, x, 0.0, 1) {
                PassageOutcome::Exit { exit, .. } => assert_eq!(exit[1], 0.0),
                _ => panic!(),
            }
        }
    }

    #[test]
    fn bottom_entry_mirrors_z() {
        let p = example_params();
        let (top, bottom) = (
            linear_passage(&p, 0.25, 0.5, 1),
            linear_passage(&p, 0.25, 0.5, -1),
        );
        match (top, bottom) {
            (
                PassageOutcome::Exit {
                    exit: et,
                    time: tt,
                    side: st,
                },
                PassageOutcome::Exit {
                    exit: eb,
                    time: tb,
                    side: sb,
                },
            ) => {
                assert_eq!(et[0], eb[0]);
                assert_eq!(et[1], eb[1]);
                assert_eq!(et[2], -eb[2]);
                assert_eq!(tt, tb);
                assert_eq!(st, SideTag::Top);
                assert_eq!(sb, SideTag::Bottom);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn stable_manifold_absorbs() {
        let p = example_params();
        assert!(matches!(
            linear_passage(&p, 0.0, 0.3, 1),
            PassageOutcome::Absorbed
        ));
    }

    #[test]
    fn param_ordering_enforced() {
        assert!(LinearSaddleParams::new(2.0, -1.0, -6.0).is_err()); // λ2 > λ3
        assert!(LinearSaddleParams::new(1.0, -6.0, -1.5).is_err()); // −λ3 > λ1? no: 1.5 > 1
        assert!(LinearSaddleParams::new(2.0, -6.0, 1.0).is_err()); // λ3 > 0
        assert!(LinearSaddleParams::new(2.0, -6.0, -1.5).is_ok());
    }
}
