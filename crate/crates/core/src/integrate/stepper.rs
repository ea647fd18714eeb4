//! Embedded Dormand–Prince 5(4) pair over n-dimensional state.
//!
//! The stepper integrates a generic RHS so the same core serves plain
//! trajectories and the variational (tangent) system. Dense output is
//! cubic Hermite per accepted step; event code refines with a controlled
//! sub-step, so the interpolant only needs to localize, not to be exact.

use super::IntegrateError;

// Hairer's DOPRI5 tableau (FSAL).
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub const MAX_DIM: usize = 9;

/// Fixed-capacity state vector (3 for plain flow, up to 9 with a tangent
/// frame) kept on the stack.
#[derive(Clone, Copy, Debug)]
pub struct SVec {
    pub data: [f64; MAX_DIM],
    pub len: usize,
}

impl SVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: [0.0; MAX_DIM],
            len,
        }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut v = Self::zeros(s.len());
        v.data[..s.len()].copy_from_slice(s);
        v
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

/// One accepted step with its Hermite data.
#[derive(Clone, Copy, Debug)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    pub y0: SVec,
    pub y1: SVec,
    pub f0: SVec,
    pub f1: SVec,
}

impl DenseStep {
    /// Cubic Hermite interpolation at `t ∈ [t0, t1]`.
    pub fn interpolate(&self, t: f64) -> SVec {
        let h = self.t1 - self.t0;
        let s = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let s2 = s * s;
        let h00 = 2.0 * s2 * s - 3.0 * s2 + 1.0;
        let h10 = s2 * s - 2.0 * s2 + s;
        let h01 = -2.0 * s2 * s + 3.0 * s2;
        let h11 = s2 * s - s2;
        let mut out = SVec::zeros(self.y0.len);
        for i in 0..self.y0.len {
            out.data[i] = h00 * self.y0.data[i]
                + h10 * h * self.f0.data[i]
                + h01 * self.y1.data[i]
                + h11 * h * self.f1.data[i];
        }
        out
    }
}

pub struct Stepper<F: FnMut(&[f64], &mut [f64])> {
    rhs: F,
    pub t: f64,
    pub y: SVec,
    f_now: SVec,
    h: f64,
    tol: f64,
    t_end: f64,
    facold: f64,
}

impl<F: FnMut(&[f64], &mut [f64])> Stepper<F> {
    pub fn new(mut rhs: F, t0: f64, y0: &[f64], t_end: f64, tol: f64) -> Self {
        let y = SVec::from_slice(y0);
        let mut f_now = SVec::zeros(y.len);
        rhs(y.as_slice(), &mut f_now.data[..y.len]);
        // crude initial step from the velocity scale
        let vmag = f_now
            .as_slice()
            .iter()
            .fold(0.0_f64, |a, x| a.max(x.abs()))
            .max(1e-8);
        let ymag = y
            .as_slice()
            .iter()
            .fold(0.0_f64, |a, x| a.max(x.abs()))
            .max(1.0);
        let h0 = (0.01 * ymag / vmag).min((t_end - t0).abs()).max(1e-10);
        Self {
            rhs,
            t: t0,
            y,
            f_now,
            h: h0,
            tol,
            t_end,
            facold: 1e-4,
        }
    }

    /// Replaces the state in place (e.g. after tangent renormalization)
    /// and refreshes the cached FSAL derivative.
    pub fn set_state_recompute(&mut self, y: SVec) {
        self.y = y;
        (self.rhs)(self.y.as_slice(), &mut self.f_now.data[..self.y.len]);
    }

    pub fn done(&self) -> bool {
        self.t >= self.t_end
    }

    /// Advances one accepted step (several trial steps may be rejected
    /// internally). Returns the dense record of the accepted step.
    pub fn step(&mut self) -> Result<DenseStep, IntegrateError> {
        let n = self.y.len;
        let mut k = [SVec::zeros(n); 7];
        loop {
            let h = self.h.min(self.t_end - self.t);
            if h <= 1e-14 * self.t_end.abs().max(1.0) {
                return Err(IntegrateError::Stiffness {
                    t: self.t,
                    h,
                });
            }
            k[0] = self.f_now;
            let mut reject = false;
            for stage in 0..6 {
                let mut yi = self.y;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for i in 0..n {
                            yi.data[i] += h * a * kj.data[i];
                        }
                    }
                }
                let _ti = self.t + C[stage] * h;
                (self.rhs)(yi.as_slice(), &mut k[stage + 1].data[..n]);
                if !k[stage + 1].is_finite() {
                    reject = true;
                    break;
                }
            }
            if reject {
                self.h = h * 0.25;
                continue;
            }
            // 5th-order solution is the stage-6 state (FSAL); error from E
            let mut y_new = self.y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let b = A[5][j];
                if b != 0.0 {
                    for i in 0..n {
                        y_new.data[i] += h * b * kj.data[i];
                    }
                }
            }
            if !y_new.is_finite() {
                return Err(IntegrateError::NonFinite { t: self.t });
            }
            let mut err = 0.0_f64;
            for i in 0..n {
                let sk = self.tol + self.tol * self.y.data[i].abs().max(y_new.data[i].abs());
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += E[j] * kj.data[i];
                    }
                }
                err += (h * e / sk).powi(2);
            }
            err = (err / n as f64).sqrt();

            let expo = 0.2;
            let fac11 = err.powf(expo);
            let fac = (fac11 / self.facold.powf(0.04) / 0.9).clamp(0.1, 5.0);
            if err <= 1.0 {
                self.facold = err.max(1e-4);
                let rec = DenseStep {
                    t0: self.t,
                    t1: self.t + h,
                    y0: self.y,
                    y1: y_new,
                    f0: k[0],
                    f1: k[6],
                };
                self.t += h;
                self.y = y_new;
                self.f_now = k[6]; // FSAL
                self.h = h / fac;
                return Ok(rec);
            }
            self.h = h / (fac11 / 0.9).max(0.2);
        }
    }

    /// Integrates exactly to `t_stop ≤ t_end` (temporarily clamping the
    /// horizon), used for renormalization boundaries.
    pub fn advance_to(&mut self, t_stop: f64) -> Result<(), IntegrateError> {
        let saved = self.t_end;
        self.t_end = t_stop;
        while self.t < t_stop - 1e-15 * t_stop.abs().max(1.0) {
            self.step()?;
        }
        self.t_end = saved;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_system_matches_closed_form() {
        let rates = [2.0, -6.0, -1.0];
        let rhs = |y: &[f64], dy: &mut [f64]| {
            for i in 0..3 {
                dy[i] = rates[i] * y[i];
            }
        };
        let y0 = [0.25, 0.5, 1.0];
        let mut st = Stepper::new(rhs, 0.0, &y0, 1.0, 1e-10);
        while !st.done() {
            st.step().unwrap();
        }
        for i in 0..3 {
            let exact = y0[i] * (rates[i] * 1.0_f64).exp();
            assert!(
                (st.y.data[i] - exact).abs() <= 1e-8 * exact.abs().max(1.0),
                "component {i}: {} vs {exact}",
                st.y.data[i]
            );
        }
    }

    #[test]
    fn dense_output_interpolates_endpoints() {
        let rhs = |y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
        };
        let mut st = Stepper::new(rhs, 0.0, &[1.0], 1.0, 1e-8);
        let rec = st.step().unwrap();
        let a = rec.interpolate(rec.t0);
        let b = rec.interpolate(rec.t1);
        assert!((a.data[0] - rec.y0.data[0]).abs() < 1e-14);
        assert!((b.data[0] - rec.y1.data[0]).abs() < 1e-14);
    }
}
