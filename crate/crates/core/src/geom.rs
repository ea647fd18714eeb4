//! Small fixed-size vector/matrix helpers used throughout the crate.
//!
//! Everything is plain `[f64; 3]` / row-major `[[f64; 3]; 3]`; the state
//! spaces here are always three-dimensional and the hot loops are simple
//! enough that a linear-algebra crate would only add indirection.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn axpy(y: Vec3, a: f64, x: Vec3) -> Vec3 {
    [y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2]]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn is_finite(a: Vec3) -> bool {
    a.iter().all(|x| x.is_finite())
}

#[inline]
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] + b[i][j];
        }
    }
    out
}

pub fn mat_scale(a: &Mat3, s: f64) -> Mat3 {
    let mut out = *a;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

/// Outer product `u vᵀ`.
pub fn outer(u: Vec3, v: Vec3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = u[i] * v[j];
        }
    }
    out
}

pub fn mat_max_abs(m: &Mat3) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn diag(d: Vec3) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Sum of the principal 2×2 minors (second elementary symmetric function
/// of the eigenvalues).
pub fn second_invariant(m: &Mat3) -> f64 {
    (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[0][0] * m[1][1] - m[0][1] * m[1][0])
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot collapses (singular matrix).
pub fn solve3(m: &Mat3, b: Vec3) -> Option<Vec3> {
    let mut a = [
        [m[0][0], m[0][1], m[0][2], b[0]],
        [m[1][0], m[1][1], m[1][2], b[1]],
        [m[2][0], m[2][1], m[2][2], b[2]],
    ];
    let scale = mat_max_abs(m).max(1e-300);
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut s = a[col][3];
        for k in col + 1..3 {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Gram-Schmidt orthonormalization of two vectors; returns the frame and
/// the parallelogram area spanned before normalization.
pub fn orthonormalize2(u: Vec3, v: Vec3) -> ([Vec3; 2], f64) {
    let area = norm(cross(u, v));
    let nu = norm(u);
    let e1 = scale(u, 1.0 / nu);
    let w = axpy(v, -dot(v, e1), e1);
    let nw = norm(w);
    let e2 = scale(w, 1.0 / nw);
    ([e1, e2], area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve3_recovers_solution() {
        let m = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let x = [1.0, -2.0, 0.5];
        let b = mat_vec(&m, x);
        let got = solve3(&m, b).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn solve3_rejects_singular() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(solve3(&m, [1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn cross_area() {
        let ([e1, e2], area) = orthonormalize2([2.0, 0.0, 0.0], [1.0, 3.0, 0.0]);
        assert!((area - 6.0).abs() < 1e-12);
        assert!(dot(e1, e2).abs() < 1e-12);
        assert!((norm(e1) - 1.0).abs() < 1e-12);
        assert!((norm(e2) - 1.0).abs() < 1e-12);
    }
}
