//! Equilibrium location and classification.
//!
//! Equilibria are found by Newton iteration seeded on a grid, then
//! classified through the eigenvalues of the field Jacobian. The
//! Lorenz-like test in 3-D: all eigenvalues real with
//! `λ_ss < λ_s < 0 < λ_u` and `−λ_u < λ_s` (the contraction toward the
//! weak-stable direction is beaten by the expansion).

use crate::field::{velocity_scale, VectorField};
use crate::geom::{
    axpy, det, dist, mat_max_abs, norm, second_invariant, solve3, trace, Mat3, Vec3,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Absolute spectral tolerance: real parts inside ±1e-8 count as zero and
/// imaginary parts inside ±1e-8 count as real.
pub const SPECTRAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    LorenzLike,
    SaddleFocus,
    Saddle,
    Sink,
    Source,
    NonHyperbolic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub location: Vec3,
    pub eigenvalues: [ComplexPair; 3],
    pub kind: EquilibriumKind,
    pub lambda_s: Option<f64>,
    pub lambda_u: Option<f64>,
    pub lambda_ss: Option<f64>,
}

/// Serializable complex number `{re, im}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// Eigenvalues of a 3×3 matrix through the characteristic cubic
/// `λ³ − tr·λ² + m₂·λ − det`, solved in closed form.
pub fn eigenvalues3(m: &Mat3) -> [Complex64; 3] {
    let p = -trace(m);
    let q = second_invariant(m);
    let r = -det(m);
    solve_cubic(p, q, r)
}

/// Roots of `λ³ + pλ² + qλ + r`.
fn solve_cubic(p: f64, q: f64, r: f64) -> [Complex64; 3] {
    // depressed cubic t³ + at + b with λ = t − p/3
    let shift = p / 3.0;
    let a = q - p * p / 3.0;
    let b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    let disc = -4.0 * a * a * a - 27.0 * b * b;
    let roots = if disc >= 0.0 {
        // three real roots, trigonometric form
        if a.abs() < 1e-300 {
            let t = (-b).cbrt();
            [t, t, t]
        } else {
            let m = 2.0 * (-a / 3.0).sqrt();
            let arg = (3.0 * b / (a * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let tau = 2.0 * std::f64::consts::PI / 3.0;
            [
                m * theta.cos(),
                m * (theta - tau).cos(),
                m * (theta + tau).cos(),
            ]
        }
        .map(|t| Complex64::new(t - shift, 0.0))
    } else {
        // one real root (Cardano), then the conjugate pair by deflation
        let half_b = b / 2.0;
        let inner = (half_b * half_b + a * a * a / 27.0).sqrt();
        let u = (-half_b + inner).cbrt();
        let v = (-half_b - inner).cbrt();
        let t1 = u + v;
        // t² + t1·t + (t1² + a) = 0 for the remaining pair
        let disc_pair = (t1 * t1 + 4.0 * (t1 * t1 + a)).max(0.0);
        let re = -t1 / 2.0 - shift;
        let im = (disc_pair.abs()).sqrt() / 2.0;
        // recover imaginary part from the deflated quadratic directly
        let c = t1 * t1 + a;
        let im = if c > t1 * t1 / 4.0 {
            (c - t1 * t1 / 4.0).sqrt()
        } else {
            im
        };
        [
            Complex64::new(t1 - shift, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    };
    roots
}

/// Classifies the equilibrium at `location` from the field Jacobian there.
pub fn classify(location: Vec3, jacobian: &Mat3) -> EquilibriumReport {
    let mut eig = eigenvalues3(jacobian);
    // canonical order: by real part ascending, imaginary part as tiebreak
    eig.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let kind = classify_spectrum(&eig);
    let reals: Vec<f64> = eig
        .iter()
        .filter(|c| c.im.abs() <= SPECTRAL_TOL)
        .map(|c| c.re)
        .collect();
    let lambda_u = eig
        .iter()
        .map(|c| c.re)
        .filter(|&re| re > SPECTRAL_TOL)
        .fold(None, |acc: Option<f64>, re| {
            Some(acc.map_or(re, |a: f64| a.min(re)))
        });
    let lambda_s = eig
        .iter()
        .map(|c| c.re)
        .filter(|&re| re < -SPECTRAL_TOL)
        .fold(None, |acc: Option<f64>, re| {
            Some(acc.map_or(re, |a: f64| a.max(re)))
        });
    let lambda_ss = reals
        .iter()
        .copied()
        .filter(|&re| re < -SPECTRAL_TOL)
        .fold(None, |acc: Option<f64>, re| {
            Some(acc.map_or(re, |a: f64| a.min(re)))
        });
    EquilibriumReport {
        location,
        eigenvalues: [eig[0].into(), eig[1].into(), eig[2].into()],
        kind,
        lambda_s,
        lambda_u,
        lambda_ss,
    }
}

fn classify_spectrum(eig: &[Complex64; 3]) -> EquilibriumKind {
    if eig.iter().any(|c| c.re.abs() < SPECTRAL_TOL) {
        return EquilibriumKind::NonHyperbolic;
    }
    let all_real = eig.iter().all(|c| c.im.abs() <= SPECTRAL_TOL);
    let n_neg = eig.iter().filter(|c| c.re < 0.0).count();
    if all_real {
        match n_neg {
            3 => EquilibriumKind::Sink,
            0 => EquilibriumKind::Source,
            2 => {
                // sorted ascending: [λ_ss, λ_s, λ_u]
                let (ss, s, u) = (eig[0].re, eig[1].re, eig[2].re);
                let lorenz = ss < s - SPECTRAL_TOL
                    && s < -SPECTRAL_TOL
                    && u > SPECTRAL_TOL
                    && -u < s - SPECTRAL_TOL;
                if lorenz {
                    EquilibriumKind::LorenzLike
                } else {
                    EquilibriumKind::Saddle
                }
            }
            _ => EquilibriumKind::Saddle,
        }
    } else if n_neg == 3 {
        EquilibriumKind::Sink
    } else if n_neg == 0 {
        EquilibriumKind::Source
    } else {
        EquilibriumKind::SaddleFocus
    }
}

/// Largest characteristic-polynomial residual `|det(J − λI)|` over the
/// reported eigenvalues, for verification against `1e-8·‖J‖³`.
pub fn charpoly_residual(jacobian: &Mat3, eig: &[ComplexPair; 3]) -> f64 {
    let p = -trace(jacobian);
    let q = second_invariant(jacobian);
    let r = -det(jacobian);
    eig.iter()
        .map(|c| {
            let l = Complex64::new(c.re, c.im);
            (l * l * l + p * l * l + q * l + r).norm()
        })
        .fold(0.0, f64::max)
}

/// Unit eigenvector for a real eigenvalue of a 3×3 matrix, via the largest
/// cross product of rows of `J − λI`.
pub fn real_eigenvector(jacobian: &Mat3, lambda: f64) -> Option<Vec3> {
    let mut a = *jacobian;
    for i in 0..3 {
        a[i][i] -= lambda;
    }
    let rows = [a[0], a[1], a[2]];
    let candidates = [
        crate::geom::cross(rows[0], rows[1]),
        crate::geom::cross(rows[0], rows[2]),
        crate::geom::cross(rows[1], rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|x, y| norm(**x).partial_cmp(&norm(**y)).unwrap())?;
    let n = norm(*best);
    if n < 1e-12 * mat_max_abs(&a).max(1e-12) {
        return None;
    }
    Some(crate::geom::scale(*best, 1.0 / n))
}

/// Finds all equilibria of `field` inside its domain box: Newton from a
/// grid of seeds with spacing `grid_res`, deduplicated at 1e-6 of the box
/// diameter. Diverging seeds are dropped silently; a singular Jacobian at
/// a converged root reports as non-hyperbolic.
pub fn find_equilibria(field: &dyn VectorField, grid_res: f64) -> Vec<EquilibriumReport> {
    let b = field.domain();
    assert!(
        grid_res <= b.min_edge() / 10.0,
        "grid_res {grid_res} too coarse for box (min edge {})",
        b.min_edge()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let vscale = velocity_scale(field, &mut rng);
    let diam = b.diameter();
    let dedup = 1e-6 * diam;
    let mut roots: Vec<Vec3> = Vec::new();

    let counts: Vec<usize> = (0..3)
        .map(|i| ((b.edge(i) / grid_res).ceil() as usize).max(2))
        .collect();
    for ix in 0..=counts[0] {
        for iy in 0..=counts[1] {
            for iz in 0..=counts[2] {
                let seed = [
                    b.min[0] + ix as f64 / counts[0] as f64 * b.edge(0),
                    b.min[1] + iy as f64 / counts[1] as f64 * b.edge(1),
                    b.min[2] + iz as f64 / counts[2] as f64 * b.edge(2),
                ];
                if let Some(root) = newton_root(field, seed, vscale, diam) {
                    if !roots.iter().any(|r| dist(*r, root) < dedup) {
                        roots.push(root);
                    }
                }
            }
        }
    }
    roots
        .into_iter()
        .map(|loc| classify(loc, &field.jacobian(loc)))
        .collect()
}

fn newton_root(field: &dyn VectorField, seed: Vec3, vscale: f64, diam: f64) -> Option<Vec3> {
    let b = field.domain();
    let mut x = seed;
    for _ in 0..60 {
        let f = field.velocity(x);
        if norm(f) <= 1e-12 * vscale {
            break;
        }
        let j = field.jacobian(x);
        let dx = solve3(&j, [-f[0], -f[1], -f[2]])?;
        // damp wild steps so seeds do not tunnel across basins
        let step = norm(dx);
        let capped = if step > 0.1 * diam {
            crate::geom::scale(dx, 0.1 * diam / step)
        } else {
            dx
        };
        x = axpy(x, 1.0, capped);
        let escape = (0..3).any(|i| {
            !b.periodic[i] && (x[i] < b.min[i] - b.edge(i) || x[i] > b.max[i] + b.edge(i))
        });
        if escape {
            return None;
        }
    }
    let f = field.velocity(x);
    // final membership and residual check per the report invariant
    if norm(f) <= 1e-10 * vscale && b.contains(x) {
        Some(x)
    } else {
        None
    }
}

/// Number of Lorenz-like reports (callers restrict to the attracting set
/// first; membership is the zoo's trapping-region test, not re-derived
/// here).
pub fn count_lorenz_like(reports: &[EquilibriumReport]) -> usize {
    reports
        .iter()
        .filter(|r| r.kind == EquilibriumKind::LorenzLike)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{
        lorenz_classic, morse_smale_space, suspension_field, LorenzParams,
    };
    use crate::geom::diag;

    #[test]
    fn lorenz_has_three_equilibria() {
        let f = lorenz_classic(LorenzParams::classic());
        let reports = find_equilibria(f.as_ref(), 4.0);
        assert_eq!(reports.len(), 3, "got {:?}", reports.iter().map(|r| r.location).collect::<Vec<_>>());
        let w = 72.0_f64.sqrt();
        let expected = [[0.0, 0.0, 0.0], [w, w, 27.0], [-w, -w, 27.0]];
        for e in expected {
            assert!(
                reports.iter().any(|r| dist(r.location, e) < 1e-6),
                "missing equilibrium near {e:?}"
            );
        }
    }

    #[test]
    fn lorenz_origin_classifies_lorenz_like() {
        let f = lorenz_classic(LorenzParams::classic());
        let rep = classify([0.0; 3], &f.jacobian([0.0; 3]));
        assert_eq!(rep.kind, EquilibriumKind::LorenzLike);
        let s = 1201.0_f64.sqrt();
        let expected = [(-11.0 - s) / 2.0, -8.0 / 3.0, (-11.0 + s) / 2.0];
        for (got, want) in rep.eigenvalues.iter().zip(expected) {
            assert!(got.im.abs() < 1e-10);
            assert!((got.re - want).abs() < 1e-9, "{} vs {want}", got.re);
        }
        assert!((rep.lambda_s.unwrap() + 8.0 / 3.0).abs() < 1e-9);
        assert!((rep.lambda_u.unwrap() - (-11.0 + s) / 2.0).abs() < 1e-9);
        // λ_s/λ_u ∈ (−1, 0) for Lorenz-like reports
        let ratio = rep.lambda_s.unwrap() / rep.lambda_u.unwrap();
        assert!(ratio > -1.0 && ratio < 0.0);
    }

    #[test]
    fn lorenz_wings_are_saddle_foci() {
        let f = lorenz_classic(LorenzParams::classic());
        let w = 72.0_f64.sqrt();
        for loc in [[w, w, 27.0], [-w, -w, 27.0]] {
            let rep = classify(loc, &f.jacobian(loc));
            assert_eq!(rep.kind, EquilibriumKind::SaddleFocus);
            // one real negative eigenvalue plus an expanding complex pair
            let real: Vec<_> = rep
                .eigenvalues
                .iter()
                .filter(|c| c.im.abs() < 1e-8)
                .collect();
            assert_eq!(real.len(), 1);
            assert!(real[0].re < 0.0);
            let pair: Vec<_> = rep
                .eigenvalues
                .iter()
                .filter(|c| c.im.abs() >= 1e-8)
                .collect();
            assert_eq!(pair.len(), 2);
            assert!(pair.iter().all(|c| c.re > 0.0));
        }
    }

    #[test]
    fn plain_kinds() {
        let rep = classify([0.0; 3], &diag([-1.0, -2.0, -3.0]));
        assert_eq!(rep.kind, EquilibriumKind::Sink);
        let rep = classify([0.0; 3], &diag([1.0, 2.0, 3.0]));
        assert_eq!(rep.kind, EquilibriumKind::Source);
        let rep = classify([0.0; 3], &diag([1.0, 2.0, -3.0]));
        assert_eq!(rep.kind, EquilibriumKind::Saddle);
        // two negatives but the weak-stable condition fails: −λu ≥ λs
        let rep = classify([0.0; 3], &diag([-3.0, -2.0, 1.0]));
        assert_eq!(rep.kind, EquilibriumKind::Saddle);
        let rep = classify([0.0; 3], &diag([-3.0, 0.0, 1.0]));
        assert_eq!(rep.kind, EquilibriumKind::NonHyperbolic);
    }

    #[test]
    fn suspension_has_no_equilibria() {
        let f = suspension_field(1).unwrap();
        assert!(find_equilibria(f.as_ref(), 0.1).is_empty());
    }

    #[test]
    fn spatial_morse_smale_equilibria() {
        let f = morse_smale_space(1).unwrap();
        let reports = find_equilibria(f.as_ref(), 0.5);
        assert_eq!(reports.len(), 3);
        let mut xs: Vec<f64> = reports.iter().map(|r| r.location[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in xs.iter().zip([-5.0, 5.0, 35.0]) {
            assert!((got - want).abs() < 1e-6);
        }
        let lorenz_like = reports
            .iter()
            .filter(|r| r.kind == EquilibriumKind::LorenzLike)
            .count();
        assert_eq!(lorenz_like, 2); // x = −5 and x = 35
    }

    #[test]
    fn eigen_residuals_small() {
        let f = lorenz_classic(LorenzParams::classic());
        for loc in [[0.0; 3], [72.0_f64.sqrt(), 72.0_f64.sqrt(), 27.0]] {
            let j = f.jacobian(loc);
            let rep = classify(loc, &j);
            let res = charpoly_residual(&j, &rep.eigenvalues);
            let bound = 1e-8 * mat_max_abs(&j).powi(3);
            assert!(res <= bound, "residual {res} > {bound}");
        }
    }

    #[test]
    fn classification_invariant_under_reordering() {
        // same spectrum presented through different similarity transforms
        let spectra = [
            [-22.8, -2.6, 11.8],
            [11.8, -22.8, -2.6],
            [-2.6, 11.8, -22.8],
        ];
        for s in spectra {
            let rep = classify([0.0; 3], &diag(s));
            assert_eq!(rep.kind, EquilibriumKind::LorenzLike);
            assert!((rep.lambda_ss.unwrap() + 22.8).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvector_of_real_eigenvalue() {
        let m = diag([2.0, -6.0, -1.0]);
        let v = real_eigenvector(&m, -6.0).unwrap();
        assert!((v[1].abs() - 1.0).abs() < 1e-12);
        assert!(v[0].abs() < 1e-12 && v[2].abs() < 1e-12);
    }
}
