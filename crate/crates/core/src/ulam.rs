//! Ulam discretization of the transfer operator of a piecewise expanding
//! interval map, and the count of its ergodic absolutely continuous
//! components — the independent oracle for the census on geometric models.

use crate::map1d::{MapError, PiecewiseMap1D};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UlamError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: f64 },
    #[error("power iteration found no eigenvalue within {0} of 1: matrix corrupt")]
    NoFixedVector(f64),
    #[error("eig_tol {0} outside [1e-12, 1e-6]")]
    EigTol(f64),
}

/// Row-stochastic bin-to-bin transition operator on a uniform partition.
pub struct UlamOperator {
    pub n: usize,
    pub domain: [f64; 2],
    /// Sparse rows: `(target_bin, fraction)` pairs.
    rows: Vec<Vec<(u32, f64)>>,
}

/// Builds the Ulam matrix: entry (i, j) is the Lebesgue fraction of bin i
/// mapped into bin j, assembled per branch by exact interval images (the
/// branch inverses cut each bin at the exact preimages of bin edges).
pub fn ulam_build(map: &PiecewiseMap1D, n: usize) -> Result<UlamOperator, UlamError> {
    assert!(n >= 64, "Ulam needs at least 64 bins");
    map.check_expansion(std::f64::consts::SQRT_2)?;
    let [lo, hi] = map.domain;
    let h = (hi - lo) / n as f64;
    let bin_of = |x: f64| -> i64 { ((x - lo) / h).floor() as i64 };

    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let bin_lo = lo + i as f64 * h;
            let bin_hi = bin_lo + h;
            let mut row: Vec<(u32, f64)> = Vec::new();
            for br in &map.branches {
                let a = bin_lo.max(br.lo);
                let b = bin_hi.min(br.hi);
                if b <= a {
                    continue;
                }
                let (ya, yb) = (br.chain.eval(a), br.chain.eval(b));
                let (ylo, yhi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
                let j_lo = bin_of(ylo).clamp(0, n as i64 - 1) as usize;
                let j_hi = bin_of(yhi.min(hi - 0.5 * h * 1e-9)).clamp(0, n as i64 - 1) as usize;
                for j in j_lo..=j_hi {
                    let cell_lo = (lo + j as f64 * h).max(ylo);
                    let cell_hi = (lo + (j + 1) as f64 * h).min(yhi);
                    if cell_hi <= cell_lo {
                        continue;
                    }
                    // exact preimage length of the y-cell inside [a, b]
                    let (mut xa, mut xb) = (br.chain.invert(cell_lo), br.chain.invert(cell_hi));
                    if xa > xb {
                        std::mem::swap(&mut xa, &mut xb);
                    }
                    let frac = ((xb.min(b) - xa.max(a)).max(0.0)) / h;
                    if frac > 0.0 {
                        row.push((j as u32, frac));
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            // merge duplicate targets
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (j, f) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += f,
                    _ => merged.push((j, f)),
                }
            }
            merged
        })
        .collect();

    let op = UlamOperator {
        n,
        domain: map.domain,
        rows,
    };
    for (i, row) in op.rows.iter().enumerate() {
        let sum: f64 = row.iter().map(|e| e.1).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(UlamError::RowSum { row: i, sum });
        }
        if row.iter().any(|e| e.1 < 0.0) {
            return Err(UlamError::RowSum { row: i, sum: -1.0 });
        }
    }
    Ok(op)
}

impl UlamOperator {
    /// Density evolution `ρ ← ρP` (mass vector times the row-stochastic
    /// matrix).
    pub fn apply(&self, rho: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            let m = rho[i];
            if m != 0.0 {
                for &(j, f) in row {
                    out[j as usize] += m * f;
                }
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn bin_midpoint(&self, i: usize) -> f64 {
        let h = (self.domain[1] - self.domain[0]) / self.n as f64;
        self.domain[0] + (i as f64 + 0.5) * h
    }

    pub fn bin_width(&self) -> f64 {
        (self.domain[1] - self.domain[0]) / self.n as f64
    }
}

/// Normalized invariant mass vector (sums to 1 over bins).
#[derive(Debug, Clone)]
pub struct InvariantDensity {
    pub mass: Vec<f64>,
    pub support_bins: usize,
}

pub struct DensityReport {
    pub components: Vec<InvariantDensity>,
    /// Modulus of the subdominant eigenvalue (mixing diagnostic, reported
    /// but never asserted).
    pub second_eigenvalue: f64,
}

const MAX_POWER_ITERS: usize = 40_000;

fn power_iterate(op: &UlamOperator, start: Vec<f64>, eig_tol: f64) -> Option<Vec<f64>> {
    let mut v = normalize(start)?;
    for it in 0..MAX_POWER_ITERS {
        let mut w = op.apply(&v);
        // Cesàro smoothing guards against near-periodic behavior
        if it % 16 == 15 {
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = 0.5 * (*wi + vi);
            }
        }
        let w = normalize(w)?;
        if it % 8 == 7 {
            let resid: f64 = op
                .apply(&w)
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .sum();
            if resid <= eig_tol {
                return Some(w);
            }
        }
        v = w;
    }
    None
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if s <= 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= s;
    }
    Some(v)
}

fn support(v: &[f64], floor: f64) -> Vec<bool> {
    v.iter().map(|&x| x > floor).collect()
}

fn overlap_bins(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| **x && **y).count()
}

/// Fixed densities of the operator (eigenvalue 1 within `eig_tol`) and the
/// ergodic component count.
///
/// Power iteration runs from the uniform start plus interval indicators;
/// greedy deflation (subtracting maximal multiples of the smallest-support
/// fixed vectors) reduces the collection to extremal nonnegative fixed
/// vectors, which are then merged through the support-overlap graph (two
/// vectors share a component iff their supports overlap above one bin).
pub fn invariant_densities(op: &UlamOperator, eig_tol: f64) -> Result<DensityReport, UlamError> {
    if !(1e-12..=1e-6).contains(&eig_tol) {
        return Err(UlamError::EigTol(eig_tol));
    }
    let n = op.n;
    let mut fixed: Vec<Vec<f64>> = Vec::new();
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let windows = 16.min(n);
    for w in 0..windows {
        let mut s = vec![0.0; n];
        let lo = w * n / windows;
        let hi = ((w + 1) * n / windows).max(lo + 1);
        for x in s.iter_mut().take(hi).skip(lo) {
            *x = 1.0;
        }
        starts.push(s);
    }
    for start in starts {
        if let Some(v) = power_iterate(op, start, eig_tol) {
            fixed.push(v);
        }
    }
    if fixed.is_empty() {
        return Err(UlamError::NoFixedVector(eig_tol));
    }

    let floor = 1e-12;
    // greedy deflation: peel extremal (smallest-support) vectors
    let mut extremal: Vec<Vec<f64>> = Vec::new();
    let mut pool = fixed;
    while !pool.is_empty() {
        pool.sort_by_key(|v| v.iter().filter(|&&x| x > floor).count());
        let e = pool.remove(0);
        let es = support(&e, floor);
        // subtract the largest multiple of e keeping the rest nonnegative
        pool = pool
            .into_iter()
            .filter_map(|v| {
                let t = v
                    .iter()
                    .zip(&e)
                    .filter(|(_, &ei)| ei > floor)
                    .map(|(&vi, &ei)| vi / ei)
                    .fold(f64::INFINITY, f64::min);
                if !t.is_finite() || t <= 0.0 {
                    return Some(v);
                }
                let w: Vec<f64> = v.iter().zip(&e).map(|(&vi, &ei)| vi - t * ei).collect();
                let mass: f64 = w.iter().map(|&x| x.max(0.0)).sum();
                if mass < 1e-6 {
                    None
                } else {
                    normalize(w)
                }
            })
            .collect();
        // merge into an existing extremal class when supports overlap
        let mut merged = false;
        for ex in extremal.iter_mut() {
            if overlap_bins(&support(ex, floor), &es) > 1 {
                for (a, b) in ex.iter_mut().zip(&e) {
                    *a = 0.5 * (*a + b);
                }
                merged = true;
                break;
            }
        }
        if !merged {
            extremal.push(e);
        }
    }

    // polish each component density and measure its support
    let mut components = Vec::with_capacity(extremal.len());
    for e in extremal {
        let v = power_iterate(op, e, eig_tol).ok_or(UlamError::NoFixedVector(eig_tol))?;
        let support_bins = v.iter().filter(|&&x| x > floor).count();
        components.push(InvariantDensity {
            mass: v,
            support_bins,
        });
    }
    components.sort_by(|a, b| {
        let ca = a.mass.iter().enumerate().map(|(i, m)| i as f64 * m).sum::<f64>();
        let cb = b.mass.iter().enumerate().map(|(i, m)| i as f64 * m).sum::<f64>();
        ca.partial_cmp(&cb).unwrap()
    });

    let second = second_eigenvalue_estimate(op, &components);
    Ok(DensityReport {
        components,
        second_eigenvalue: second,
    })
}

/// Growth-rate estimate of the operator on the complement of the fixed
/// space.
fn second_eigenvalue_estimate(op: &UlamOperator, comps: &[InvariantDensity]) -> f64 {
    let n = op.n;
    let mut w: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let project = |w: &mut Vec<f64>| {
        for c in comps {
            let m: f64 = w
                .iter()
                .zip(&c.mass)
                .filter(|(_, &ci)| ci > 1e-12)
                .map(|(&wi, _)| wi)
                .sum();
            let bins: f64 = c.mass.iter().filter(|&&ci| ci > 1e-12).count() as f64;
            if bins > 0.0 {
                let mean = m / bins;
                for (wi, ci) in w.iter_mut().zip(&c.mass) {
                    if *ci > 1e-12 {
                        *wi -= mean;
                    }
                }
            }
        }
    };
    project(&mut w);
    let mut rate = 0.0;
    for _ in 0..200 {
        let mut next = op.apply(&w);
        project(&mut next);
        let norm: f64 = next.iter().map(|x| x.abs()).sum();
        if norm < 1e-300 {
            return 0.0;
        }
        rate = norm / w.iter().map(|x| x.abs()).sum::<f64>();
        for x in next.iter_mut() {
            *x /= norm;
        }
        w = next;
    }
    rate.min(1.0)
}

/// Bin-midpoint quadrature of `observable` against a density.
pub fn density_mean(op: &UlamOperator, density: &InvariantDensity, observable: impl Fn(f64) -> f64) -> f64 {
    density
        .mass
        .iter()
        .enumerate()
        .map(|(i, &m)| m * observable(op.bin_midpoint(i)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map1d::{doubling_map, two_block_doubling};

    #[test]
    fn doubling_rows_have_two_half_entries() {
        let op = ulam_build(&doubling_map(), 64).unwrap();
        for i in 0..64 {
            let row = op.row(i);
            assert_eq!(row.len(), 2, "row {i}: {row:?}");
            for &(_, f) in row {
                assert!((f - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn doubling_density_is_uniform() {
        let op = ulam_build(&doubling_map(), 256).unwrap();
        let rep = invariant_densities(&op, 1e-10).unwrap();
        assert_eq!(rep.components.len(), 1);
        let d = &rep.components[0];
        let expected = 1.0 / 256.0;
        for &m in &d.mass {
            assert!((m - expected).abs() < 1e-10 * 256.0);
        }
        let total: f64 = d.mass.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_blocks_give_two_components() {
        let op = ulam_build(&two_block_doubling(), 256).unwrap();
        let rep = invariant_densities(&op, 1e-10).unwrap();
        assert_eq!(rep.components.len(), 2);
        // supports live in separate halves
        let left = &rep.components[0];
        let right = &rep.components[1];
        let left_mass: f64 = left.mass[..128].iter().sum();
        let right_mass: f64 = right.mass[128..].iter().sum();
        assert!((left_mass - 1.0).abs() < 1e-9);
        assert!((right_mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_density_means() {
        let op = ulam_build(&doubling_map(), 4096).unwrap();
        let rep = invariant_densities(&op, 1e-10).unwrap();
        let d = &rep.components[0];
        let mean_x = density_mean(&op, d, |x| x);
        assert!((mean_x - 0.5).abs() < 1e-8);
        let mean_x2 = density_mean(&op, d, |x| x * x);
        assert!((mean_x2 - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn eig_tol_validated() {
        let op = ulam_build(&doubling_map(), 64).unwrap();
        assert!(matches!(
            invariant_densities(&op, 1e-3),
            Err(UlamError::EigTol(_))
        ));
    }
}
