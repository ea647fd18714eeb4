//! Joint integration of the variational equation `v̇ = DG(x)·v` with
//! periodic renormalization, for Lyapunov and sectional-expansion
//! estimates.

use super::stepper::Stepper;
use super::{validate_tol, IntegrateError, Trajectory};
use crate::field::VectorField;
use crate::geom::{mat_vec, norm, orthonormalize2, Vec3};

#[derive(Debug, Clone)]
pub enum TangentSeed {
    Vector(Vec3),
    Frame(Vec3, Vec3),
}

/// Log of growth factors collected at each renormalization boundary
/// (spacing `delta` in flow time). For a vector seed the factors are norm
/// growths; for a frame they are parallelogram-area growths.
#[derive(Debug, Clone)]
pub struct RenormLog {
    pub delta: f64,
    pub times: Vec<f64>,
    pub log_factors: Vec<f64>,
}

impl RenormLog {
    /// Mean exponential rate: Σ log factors / total time.
    pub fn mean_rate(&self) -> f64 {
        let total: f64 = self.log_factors.iter().sum();
        let t = self.times.last().copied().unwrap_or(0.0);
        if t > 0.0 {
            total / t
        } else {
            0.0
        }
    }

    /// Mean rate after discarding the first `burn` fraction of the log,
    /// so the tangent has aligned with the dominant direction.
    pub fn tail_rate(&self, burn: f64) -> f64 {
        let n = self.times.len();
        if n < 2 {
            return self.mean_rate();
        }
        let skip = ((n as f64 * burn) as usize).min(n - 1);
        let t0 = if skip == 0 { 0.0 } else { self.times[skip - 1] };
        let total: f64 = self.log_factors[skip..].iter().sum();
        let span = self.times[n - 1] - t0;
        if span > 0.0 {
            total / span
        } else {
            self.mean_rate()
        }
    }

    /// Least-squares fit of the cumulative log growth against
    /// `log K + θ·t`; returns `(theta, log_k, residual_fraction)` where the
    /// residual is the RMS misfit over the range of the cumulative log.
    pub fn fit_line(&self) -> (f64, f64, f64) {
        let n = self.times.len();
        if n < 2 {
            return (0.0, 0.0, 1.0);
        }
        let mut cum = Vec::with_capacity(n);
        let mut s = 0.0;
        for &f in &self.log_factors {
            s += f;
            cum.push(s);
        }
        let tbar = self.times.iter().sum::<f64>() / n as f64;
        let ybar = cum.iter().sum::<f64>() / n as f64;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (t, y) in self.times.iter().zip(&cum) {
            sxx += (t - tbar) * (t - tbar);
            sxy += (t - tbar) * (y - ybar);
        }
        let theta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let log_k = ybar - theta * tbar;
        let mut ss = 0.0;
        for (t, y) in self.times.iter().zip(&cum) {
            let r = y - (log_k + theta * t);
            ss += r * r;
        }
        let rms = (ss / n as f64).sqrt();
        let range = cum
            .iter()
            .fold(f64::NEG_INFINITY, |a, &x| a.max(x))
            - cum.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        let resid = if range > 0.0 { rms / range } else { 0.0 };
        (theta, log_k, resid)
    }
}

pub struct TangentResult {
    pub trajectory: Trajectory,
    pub log: RenormLog,
    pub final_tangent: Vec<Vec3>,
}

/// Integrates state and tangent seed together, renormalizing every `delta`
/// time unit (default 1.0) and logging the growth factors.
pub fn integrate_with_tangent(
    field: &dyn VectorField,
    x0: Vec3,
    seed: TangentSeed,
    t_end: f64,
    tol: f64,
) -> Result<TangentResult, IntegrateError> {
    integrate_with_tangent_delta(field, x0, seed, t_end, tol, 1.0)
}

pub fn integrate_with_tangent_delta(
    field: &dyn VectorField,
    x0: Vec3,
    seed: TangentSeed,
    t_end: f64,
    tol: f64,
    delta: f64,
) -> Result<TangentResult, IntegrateError> {
    validate_tol(tol)?;
    let domain = field.domain();
    if !domain.contains(x0) {
        return Err(IntegrateError::SeedOutsideDomain(x0));
    }
    let cols = match &seed {
        TangentSeed::Vector(v) => {
            assert!(norm(*v) > 0.0, "tangent seed must be nonzero");
            vec![*v]
        }
        TangentSeed::Frame(u, v) => {
            let area = norm(crate::geom::cross(*u, *v));
            assert!(area > 0.0, "tangent frame must have rank 2");
            vec![*u, *v]
        }
    };
    let ncols = cols.len();
    let dim = 3 + 3 * ncols;

    let rhs = |y: &[f64], dy: &mut [f64]| {
        let x = [y[0], y[1], y[2]];
        let v = field.velocity(x);
        dy[..3].copy_from_slice(&v);
        let jac = field.jacobian(x);
        for c in 0..ncols {
            let col = [y[3 + 3 * c], y[4 + 3 * c], y[5 + 3 * c]];
            let jv = mat_vec(&jac, col);
            dy[3 + 3 * c..6 + 3 * c].copy_from_slice(&jv);
        }
    };

    let mut y0 = vec![0.0; dim];
    y0[..3].copy_from_slice(&x0);
    // start from unit norm / unit frame so factors are pure growths
    match ncols {
        1 => {
            let u = crate::geom::scale(cols[0], 1.0 / norm(cols[0]));
            y0[3..6].copy_from_slice(&u);
        }
        _ => {
            let (frame, _) = orthonormalize2(cols[0], cols[1]);
            y0[3..6].copy_from_slice(&frame[0]);
            y0[6..9].copy_from_slice(&frame[1]);
        }
    }

    let mut st = Stepper::new(rhs, 0.0, &y0, t_end, tol);
    let mut log = RenormLog {
        delta,
        times: Vec::new(),
        log_factors: Vec::new(),
    };
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0],
        dense: None,
        exited_domain: false,
    };

    let mut t_next = delta.min(t_end);
    loop {
        st.advance_to(t_next)?;
        let x = [st.y.data[0], st.y.data[1], st.y.data[2]];
        traj.times.push(st.t);
        traj.states.push(x);
        // renormalize the tangent block in place, log the growth
        let mut y = st.y;
        let factor = match ncols {
            1 => {
                let v = [y.data[3], y.data[4], y.data[5]];
                let n = norm(v);
                for i in 0..3 {
                    y.data[3 + i] = v[i] / n;
                }
                n
            }
            _ => {
                let u = [y.data[3], y.data[4], y.data[5]];
                let v = [y.data[6], y.data[7], y.data[8]];
                let (frame, area) = orthonormalize2(u, v);
                y.data[3..6].copy_from_slice(&frame[0]);
                y.data[6..9].copy_from_slice(&frame[1]);
                area
            }
        };
        log.times.push(st.t);
        log.log_factors.push(factor.ln());
        st.set_state_recompute(y);
        if !domain.contains(x) {
            traj.exited_domain = true;
            break;
        }
        if st.t >= t_end - 1e-12 * t_end.max(1.0) {
            break;
        }
        t_next = (st.t + delta).min(t_end);
    }

    let mut final_tangent = Vec::with_capacity(ncols);
    for c in 0..ncols {
        final_tangent.push([
            st.y.data[3 + 3 * c],
            st.y.data[4 + 3 * c],
            st.y.data[5 + 3 * c],
        ]);
    }
    Ok(TangentResult {
        trajectory: traj,
        log,
        final_tangent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LinearField;
    use crate::region::Box3;

    fn diag_field() -> LinearField {
        LinearField::diagonal([2.0, -6.0, -1.0], Box3::new([-1e6; 3], [1e6; 3]))
    }

    #[test]
    fn vector_growth_matches_dominant_rate() {
        let f = diag_field();
        let res = integrate_with_tangent(
            &f,
            [0.0; 3],
            TangentSeed::Vector([1.0, 0.5, 0.5]),
            30.0,
            1e-10,
        )
        .unwrap();
        // per-unit growth after the alignment transient
        let rate = res.log.tail_rate(0.5);
        assert!((rate - 2.0).abs() < 1e-6, "rate {rate}");
    }

    #[test]
    fn frame_growth_matches_rate_sum() {
        let f = diag_field();
        let res = integrate_with_tangent(
            &f,
            [0.0; 3],
            TangentSeed::Frame([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            20.0,
            1e-10,
        )
        .unwrap();
        // area along (e1, e3) grows like e^{(λ1+λ3)t} = e^{t}
        let (theta, _k, resid) = res.log.fit_line();
        assert!((theta - 1.0).abs() < 1e-6, "theta {theta}");
        assert!(resid < 1e-8);
        let rate = res.log.mean_rate();
        assert!((rate - 1.0).abs() < 1e-6);
    }

    #[test]
    fn contracting_plane_has_negative_theta() {
        let f = diag_field();
        let res = integrate_with_tangent(
            &f,
            [0.0; 3],
            TangentSeed::Frame([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
            10.0,
            1e-10,
        )
        .unwrap();
        let (theta, _, _) = res.log.fit_line();
        assert!((theta + 7.0).abs() < 1e-6, "theta {theta}");
    }
}
