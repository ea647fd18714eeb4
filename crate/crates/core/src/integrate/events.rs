//! First-crossing detection against axis-aligned planar sections.

use super::stepper::Stepper;
use super::{validate_tol, IntegrateError};
use crate::field::VectorField;
use crate::geom::Vec3;
use thiserror::Error;

/// Axis-aligned rectangular cross-section: the plane `state[axis] = offset`
/// restricted to `bounds` in the two remaining coordinates (in increasing
/// axis order).
#[derive(Debug, Clone)]
pub struct Section {
    pub id: String,
    pub axis: usize,
    pub offset: f64,
    pub bounds: [[f64; 2]; 2],
}

impl Section {
    pub fn in_plane_axes(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        p[self.axis] - self.offset
    }

    pub fn within_bounds(&self, p: Vec3) -> bool {
        let [a, b] = self.in_plane_axes();
        p[a] >= self.bounds[0][0]
            && p[a] <= self.bounds[0][1]
            && p[b] >= self.bounds[1][0]
            && p[b] <= self.bounds[1][1]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CrossingEvent {
    pub time: f64,
    pub state: Vec3,
    pub direction: i8,
    /// Normal velocity below the grazing threshold (1e-9); census code
    /// discards grazing events.
    pub grazing: bool,
}

#[derive(Debug, Error)]
pub enum SectionEventError {
    #[error("no transversal crossing before t_max={0}")]
    Timeout(f64),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

const GRAZE_TOL: f64 = 1e-9;

/// First transversal crossing of `section` after `dead_time`, localized to
/// `|signed distance| ≤ 1e-10 × box diameter` by bisection on the dense
/// output and then Newton-polished along the flow.
pub fn integrate_to_section(
    field: &dyn VectorField,
    x0: Vec3,
    section: &Section,
    t_max: f64,
    tol: f64,
    dead_time: f64,
) -> Result<CrossingEvent, SectionEventError> {
    validate_tol(tol)?;
    let domain = field.domain();
    if !domain.contains(x0) {
        return Err(IntegrateError::SeedOutsideDomain(x0).into());
    }
    let g_tol = 1e-10 * domain.diameter();
    let rhs = |y: &[f64], dy: &mut [f64]| {
        let v = field.velocity([y[0], y[1], y[2]]);
        dy.copy_from_slice(&v);
    };
    let mut st = Stepper::new(rhs, 0.0, &x0, t_max, tol);
    while !st.done() {
        let rec = st.step()?;
        if rec.t1 <= dead_time {
            continue;
        }
        let lo_t = rec.t0.max(dead_time);
        let g_at = |t: f64| {
            let y = rec.interpolate(t);
            section.signed_distance([y.data[0], y.data[1], y.data[2]])
        };
        let mid_t = 0.5 * (lo_t + rec.t1);
        let (g_lo, g_mid, g_hi) = (g_at(lo_t), g_at(mid_t), g_at(rec.t1));
        // bracket a sign change among the three samples
        let bracket = if g_lo == 0.0 && g_hi != 0.0 {
            Some((lo_t, mid_t.min(rec.t1)))
        } else if g_lo * g_mid < 0.0 {
            Some((lo_t, mid_t))
        } else if g_mid * g_hi <= 0.0 && g_mid != 0.0 {
            Some((mid_t, rec.t1))
        } else if g_lo * g_hi < 0.0 {
            Some((lo_t, rec.t1))
        } else {
            None
        };
        let Some((mut a, mut b)) = bracket else {
            continue;
        };
        let mut t_star = 0.5 * (a + b);
        for _ in 0..200 {
            t_star = 0.5 * (a + b);
            let g = g_at(t_star);
            if g.abs() <= 0.1 * g_tol || (b - a) < 1e-16 * t_max.max(1.0) {
                break;
            }
            if g * g_at(a) <= 0.0 {
                b = t_star;
            } else {
                a = t_star;
            }
        }
        // re-integrate from the step start so the state is error-controlled,
        // then polish the time with first-order flow corrections
        let mut sub = Stepper::new(rhs, rec.t0, rec.y0.as_slice(), t_star, tol);
        sub.advance_to(t_star)?;
        let mut state = [sub.y.data[0], sub.y.data[1], sub.y.data[2]];
        let mut time = t_star;
        for _ in 0..4 {
            let g = section.signed_distance(state);
            let v = field.velocity(state)[section.axis];
            if v.abs() < 1e-300 || g.abs() <= 0.01 * g_tol {
                break;
            }
            let dt = -g / v;
            let vel = field.velocity(state);
            for i in 0..3 {
                state[i] += dt * vel[i];
            }
            time += dt;
        }
        if !section.within_bounds(state) {
            continue;
        }
        let v_norm = field.velocity(state)[section.axis];
        return Ok(CrossingEvent {
            time,
            state,
            direction: if v_norm >= 0.0 { 1 } else { -1 },
            grazing: v_norm.abs() < GRAZE_TOL,
        });
    }
    Err(SectionEventError::Timeout(t_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LinearField;
    use crate::region::Box3;

    struct ConstantUp;
    impl VectorField for ConstantUp {
        fn domain(&self) -> Box3 {
            Box3::new([-2.0; 3], [2.0; 3])
        }
        fn velocity(&self, _p: Vec3) -> Vec3 {
            [0.0, 0.0, 1.0]
        }
        fn jacobian(&self, _p: Vec3) -> crate::geom::Mat3 {
            [[0.0; 3]; 3]
        }
    }

    fn plane_z(offset: f64) -> Section {
        Section {
            id: "z".into(),
            axis: 2,
            offset,
            bounds: [[-2.0, 2.0], [-2.0, 2.0]],
        }
    }

    #[test]
    fn constant_field_hits_plane_at_unit_time() {
        let ev =
            integrate_to_section(&ConstantUp, [0.0, 0.0, 0.0], &plane_z(1.0), 5.0, 1e-9, 1e-6)
                .unwrap();
        assert!((ev.time - 1.0).abs() < 1e-9);
        assert!(crate::geom::dist(ev.state, [0.0, 0.0, 1.0]) < 1e-9);
        assert_eq!(ev.direction, 1);
        assert!(!ev.grazing);
    }

    #[test]
    fn linear_saddle_exit_matches_closed_form() {
        // diag(2,-6,-1) from (1/4, 1/2, 1) to x=1: t=ln(4)/2, exit (1, 1/128, 1/2)
        let f = LinearField::diagonal([2.0, -6.0, -1.0], Box3::new([-2.0; 3], [2.0; 3]));
        let sec = Section {
            id: "x".into(),
            axis: 0,
            offset: 1.0,
            bounds: [[-2.0, 2.0], [-2.0, 2.0]],
        };
        let ev = integrate_to_section(&f, [0.25, 0.5, 1.0], &sec, 10.0, 1e-11, 1e-6).unwrap();
        let t_exact = 4.0_f64.ln() / 2.0;
        assert!((ev.time - t_exact).abs() < 1e-9, "t={} vs {t_exact}", ev.time);
        assert!((ev.state[1] - 1.0 / 128.0).abs() < 1e-9);
        assert!((ev.state[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn dead_time_skips_start_on_section() {
        // start on the section moving away, come back through it
        struct Swing;
        impl VectorField for Swing {
            fn domain(&self) -> Box3 {
                Box3::new([-5.0; 3], [5.0; 3])
            }
            fn velocity(&self, p: Vec3) -> Vec3 {
                // harmonic oscillator in (x, z): crosses z=0 periodically
                [p[2], 0.0, -p[0]]
            }
            fn jacobian(&self, _p: Vec3) -> crate::geom::Mat3 {
                [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]
            }
        }
        let ev =
            integrate_to_section(&Swing, [1.0, 0.0, 0.0], &plane_z(0.0), 10.0, 1e-10, 1e-6)
                .unwrap();
        // z(t) = -sin t: first return to z=0 at t=π, not t=0
        assert!((ev.time - std::f64::consts::PI).abs() < 1e-7);
    }

    #[test]
    fn timeout_when_no_crossing() {
        let f = LinearField::diagonal([-1.0, -1.0, -1.0], Box3::new([-2.0; 3], [2.0; 3]));
        let res = integrate_to_section(&f, [0.5, 0.5, 0.5], &plane_z(1.5), 3.0, 1e-9, 1e-6);
        assert!(matches!(res, Err(SectionEventError::Timeout(_))));
    }
}
