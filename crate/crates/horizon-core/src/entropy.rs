//! The entropy function η, the Widom U-functional and regularity diagnostics.

use crate::error::Result;
use crate::quadrature::{adaptive_gl, QuadratureConfig};
use std::sync::Arc;

/// `-x ln x - (1-x) ln(1-x)` on `(0,1)`, zero elsewhere.
pub fn eta(x: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return 0.0;
    }
    let y = 1.0 - x;
    -x * x.ln() - y * y.ln()
}

/// First derivative of η on `(0,1)`.
pub fn eta_prime(x: f64) -> f64 {
    -x.ln() + (1.0 - x).ln()
}

/// Second derivative of η on `(0,1)`.
pub fn eta_second(x: f64) -> f64 {
    -1.0 / x - 1.0 / (1.0 - x)
}

/// A real function used in trace formulas, together with its known
/// singularities and Hölder exponent.
#[derive(Clone)]
pub struct SpectralFunction {
    pub evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub singular_points: Vec<f64>,
    pub holder_exponent: f64,
    pub support_radius: f64,
    pub name: String,
}

impl std::fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("name", &self.name)
            .field("singular_points", &self.singular_points)
            .field("holder_exponent", &self.holder_exponent)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl SpectralFunction {
    pub fn new(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(f),
            singular_points: Vec::new(),
            holder_exponent: 0.99,
            support_radius: 2.0,
            name: name.to_string(),
        }
    }

    pub fn eta() -> Self {
        Self {
            evaluator: Arc::new(eta),
            singular_points: vec![0.0, 1.0],
            holder_exponent: 0.99,
            support_radius: 2.0,
            name: "eta".into(),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x)
    }

    /// `x(1-x)`, the smooth test function of the Widom check.
    pub fn quadratic() -> Self {
        Self::new("x(1-x)", |x| x * (1.0 - x))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }
}

/// `U(a; f) = ∫₀¹ (f(ta) - t f(a)) / (t(1-t)) dt`.
///
/// The interval is split at 1/2 and mapped by `t = s²` and `t = 1 - s²`, which
/// removes the `t^{-1}` and `(1-t)^{-1}` factors from the integrand.
pub fn u_functional(f: &SpectralFunction, a: f64, quad: &QuadratureConfig) -> Result<f64> {
    let fa = f.eval(a);
    let smax = std::f64::consts::FRAC_1_SQRT_2;
    let cfg = QuadratureConfig {
        abs_tol: 0.5 * quad.abs_tol,
        ..*quad
    };
    let left = adaptive_gl(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let t = s * s;
            2.0 * (f.eval(t * a) - t * fa) / (s * (1.0 - t))
        },
        0.0,
        smax,
        &cfg,
    )?;
    let right = adaptive_gl(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let t = 1.0 - s * s;
            2.0 * (f.eval(t * a) - t * fa) / (t * s)
        },
        0.0,
        smax,
        &cfg,
    )?;
    Ok(left + right)
}

/// Result of a sampled regularity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub sup_ratio: f64,
    pub finite: bool,
}

/// Derivative of η of order `k` at `x`, returning 0 outside `(0,1)` for `k = 0`.
fn eta_derivative(k: u8, x: f64) -> f64 {
    match k {
        0 => eta(x),
        1 => eta_prime(x),
        _ => eta_second(x),
    }
}

/// `|η^{(k)}(x)| · |x - z|^{k - γ}`, with the convention 0 when both factors
/// degenerate at `x = z` for `k = 0`.
pub fn eta_regularity_ratio(gamma: f64, z: f64, k: u8, x: f64) -> f64 {
    let dist = (x - z).abs();
    let d = eta_derivative(k, x);
    if d == 0.0 {
        return 0.0;
    }
    d.abs() * dist.powf(k as f64 - gamma)
}

/// Samples `sample_count` log-spaced points at distance `(1e-12, 1e-1)` from
/// `z ∈ {0, 1}` and reports the largest ratio `|η^{(k)}(x)| |x - z|^{k-γ}`.
///
/// `finite` additionally requires that the innermost decade does not exceed the
/// outer samples by more than a factor 10, which separates a bounded ratio from
/// one that blows up like a negative power.
pub fn verify_eta_regularity(gamma: f64, z: f64, k: u8, sample_count: usize) -> RegularityReport {
    let n = sample_count.max(2);
    let (lo, hi) = (-12.0_f64, -1.0_f64);
    let mut sup = 0.0_f64;
    let mut inner = 0.0_f64;
    let mut outer = 0.0_f64;
    for i in 0..n {
        let e = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let dist = 10f64.powf(e);
        let x = if z >= 0.5 { 1.0 - dist } else { dist };
        let r = eta_regularity_ratio(gamma, z, k, x);
        sup = sup.max(r);
        if e < lo + 1.0 {
            inner = inner.max(r);
        } else {
            outer = outer.max(r);
        }
    }
    RegularityReport {
        sup_ratio: sup,
        finite: sup.is_finite() && inner <= 10.0 * outer.max(f64::MIN_POSITIVE),
    }
}
