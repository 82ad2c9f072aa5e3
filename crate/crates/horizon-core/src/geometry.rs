//! Schwarzschild radial geometry and the Regge–Wheeler coordinate.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Black hole of mass `M` in geometric units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackHole {
    pub mass: f64,
}

impl BlackHole {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("black hole mass must be positive, got {mass}")));
        }
        Ok(Self { mass })
    }

    pub fn horizon_radius(&self) -> f64 {
        2.0 * self.mass
    }
}

/// A point outside the horizon in both radial coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub r: f64,
    pub u: f64,
}

impl RadialPoint {
    pub fn from_r(r: f64, bh: &BlackHole) -> Result<Self> {
        Ok(Self { r, u: regge_wheeler_u(r, bh)? })
    }

    pub fn from_u(u: f64, bh: &BlackHole) -> Result<Self> {
        Ok(Self { r: inverse_regge_wheeler(u, bh)?, u })
    }
}

/// `Δ(r) = r² - 2Mr`.
pub fn delta(r: f64, bh: &BlackHole) -> f64 {
    r * (r - 2.0 * bh.mass)
}

/// `u(r) = r + 2M ln(r - 2M)`.
pub fn regge_wheeler_u(r: f64, bh: &BlackHole) -> Result<f64> {
    let x = r - 2.0 * bh.mass;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("r = {r} is not outside the horizon 2M = {}", 2.0 * bh.mass)));
    }
    Ok(r + 2.0 * bh.mass * x.ln())
}

/// Principal branch of the Lambert W function on `[0, ∞)`.
pub fn lambert_w(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut w = if x < 1.0 {
        x
    } else {
        let l = x.ln();
        if l > 1.0 {
            l - l.ln()
        } else {
            0.5 * l + 0.5
        }
    };
    halley(&mut w, x);
    w
}

/// `W(e^y)` without forming `e^y`, usable for large `y`.
pub fn lambert_w_exp(y: f64) -> f64 {
    if y < 20.0 {
        return lambert_w(y.exp());
    }
    // solve w + ln w = y
    let mut w = y - y.ln();
    for _ in 0..50 {
        let g = w + w.ln() - y;
        let gp = 1.0 + 1.0 / w;
        let gpp = -1.0 / (w * w);
        let step = g / gp;
        let step = step / (1.0 - 0.5 * step * gpp / gp);
        w -= step;
        if step.abs() <= 1e-16 * w.abs() {
            break;
        }
    }
    w
}

fn halley(w: &mut f64, x: f64) {
    for _ in 0..100 {
        let ew = w.exp();
        let f = *w * ew - x;
        let wp1 = *w + 1.0;
        let denom = ew * wp1 - (*w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        *w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
}

/// Inverts the Regge–Wheeler coordinate:
/// `r - 2M = 2M W(e^{u/(2M) - 1} / (2M))`.
///
/// For tiny arguments the series `W(x) = x - x² + 3x³/2` is used so that the
/// result keeps full relative accuracy in `r - 2M`.
pub fn inverse_regge_wheeler(u: f64, bh: &BlackHole) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("u must be finite, got {u}")));
    }
    let m2 = 2.0 * bh.mass;
    let y = u / m2 - 1.0 - m2.ln();
    let w = if y < 1e-8f64.ln() {
        let x = y.exp();
        x * (1.0 - x + 1.5 * x * x)
    } else {
        lambert_w_exp(y)
    };
    let r = m2 + m2 * w;
    if !r.is_finite() {
        return Err(Error::Convergence(format!("Lambert W inversion failed at u = {u}")));
    }
    Ok(r)
}

/// `r - 2M` as a function of `u`, accurate when `r` is close to the horizon.
pub fn horizon_distance(u: f64, bh: &BlackHole) -> Result<f64> {
    let m2 = 2.0 * bh.mass;
    let y = u / m2 - 1.0 - m2.ln();
    if y < 1e-8f64.ln() {
        let x = y.exp();
        Ok(m2 * x * (1.0 - x + 1.5 * x * x))
    } else {
        Ok(inverse_regge_wheeler(u, bh)? - m2)
    }
}
