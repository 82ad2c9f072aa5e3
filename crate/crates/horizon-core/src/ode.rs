//! Dormand–Prince 5(4) integrator for complex two-component systems, with
//! cubic Hermite dense output on the accepted grid.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

pub type State = [C64; 2];

/// Accepted steps of an integration, in the order they were taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub u: Vec<f64>,
    pub y: Vec<State>,
    pub dy: Vec<State>,
}

impl Trajectory {
    /// Cubic Hermite interpolation. The grid may be increasing or decreasing.
    pub fn interpolate(&self, at: f64) -> State {
        let n = self.u.len();
        if n == 1 {
            return self.y[0];
        }
        let increasing = self.u[n - 1] > self.u[0];
        let key = |x: f64| if increasing { x } else { -x };
        let k = key(at);
        let pos = self.u.partition_point(|&x| key(x) <= k);
        let i = pos.clamp(1, n - 1) - 1;
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let h = u1 - u0;
        let t = (at - u0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut out = [C64::new(0.0, 0.0); 2];
        for c in 0..2 {
            out[c] = self.y[i][c] * h00 + self.dy[i][c] * (h10 * h) + self.y[i + 1][c] * h01 + self.dy[i + 1][c] * (h11 * h);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Local error target per step, mixed absolute/relative.
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            h_init: 1e-2,
            h_max: 1.0,
            h_min: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..2 {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrates `y' = f(u, y)` from `u0` to `u1` (either direction).
pub fn integrate<F>(mut f: F, u0: f64, u1: f64, y0: State, ctl: &StepControl) -> Result<Trajectory>
where
    F: FnMut(f64, &State) -> State,
{
    let dir = if u1 >= u0 { 1.0 } else { -1.0 };
    let span = (u1 - u0).abs();
    let mut u = u0;
    let mut y = y0;
    let mut k1 = f(u, &y);
    let mut traj = Trajectory {
        u: vec![u],
        y: vec![y],
        dy: vec![k1],
    };
    if span == 0.0 {
        return Ok(traj);
    }
    let mut h = ctl.h_init.min(span).min(ctl.h_max);
    let mut steps = 0usize;
    while (u1 - u) * dir > 0.0 {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Error::StepFailure { u, h });
        }
        let last = h >= (u1 - u).abs();
        if last {
            h = (u1 - u).abs();
        }
        let hs = h * dir;
        let k2 = f(u + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(u + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(u + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(u + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(u + hs, &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y5 = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let un = if last { u1 } else { u + hs };
        let k7 = f(un, &y5);
        let mut err = 0.0_f64;
        for i in 0..2 {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let scale = ctl.tol * (1.0 + y[i].norm().max(y5[i].norm()));
            err = err.max(e.norm() / scale);
        }
        if err <= 1.0 {
            u = un;
            y = y5;
            k1 = k7;
            traj.u.push(u);
            traj.y.push(y);
            traj.dy.push(k1);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).min(ctl.h_max);
        if h < ctl.h_min && (u1 - u) * dir > 0.0 {
            return Err(Error::StepFailure { u, h });
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_system_is_exact() {
        // y1' = i y1, y2' = -2 y2
        let f = |_u: f64, y: &State| [y[0] * C64::new(0.0, 1.0), y[1] * -2.0];
        let y0 = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let t = integrate(f, 0.0, 5.0, y0, &StepControl::new(1e-12)).unwrap();
        let end = *t.y.last().unwrap();
        assert!((end[0] - C64::new(0.0, 5.0).exp()).norm() < 1e-10);
        assert!((end[1].re - (-10.0f64).exp()).abs() < 1e-12);
        let mid = t.interpolate(2.345);
        assert!((mid[0] - C64::new(0.0, 2.345).exp()).norm() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let f = |u: f64, _y: &State| [C64::new(u.cos(), 0.0), C64::new(0.0, 0.0)];
        let y0 = [C64::new(0.0, 0.0); 2];
        let t = integrate(f, 3.0, -1.0, y0, &StepControl::new(1e-12)).unwrap();
        let end = t.y.last().unwrap()[0].re;
        assert!((end - ((-1.0f64).sin() - 3.0f64.sin())).abs() < 1e-10);
        let mid = t.interpolate(1.0)[0].re;
        assert!((mid - (1.0f64.sin() - 3.0f64.sin())).abs() < 1e-8);
    }
}
