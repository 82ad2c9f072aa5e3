//! Gauss rules and composite panel quadrature.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
///
/// Nodes come from the Golub–Welsch matrix and are polished by Newton steps on
/// the three-term recurrence; weights use the closed derivative formula so that
/// tiny endpoint weights keep full relative accuracy.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::Domain(format!(
            "Gauss-Jacobi needs n >= 1, alpha, beta > -1 (got n={n}, alpha={alpha}, beta={beta})"
        )));
    }
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let s1 = 2.0 * j + ab;
            let num = 4.0 * j * (j + alpha) * (j + beta) * (j + ab);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            off[k] = (num / den).sqrt();
        }
    }
    let mut nodes = symmetric_tridiagonal_eigenvalues(&mut diag, &mut off)?;
    nodes.sort_by(|a, b| a.total_cmp(b));

    let ln_c = statrs::function::gamma::ln_gamma(n as f64 + alpha + 1.0)
        + statrs::function::gamma::ln_gamma(n as f64 + beta + 1.0)
        - statrs::function::gamma::ln_gamma(n as f64 + ab + 1.0)
        - statrs::function::gamma::ln_gamma(n as f64 + 1.0)
        + (ab + 1.0) * std::f64::consts::LN_2;
    let mut weights = vec![0.0; n];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let (p, dp) = jacobi_with_derivative(n, alpha, beta, *x);
            let step = p / dp;
            let nx = *x - step;
            if nx > -1.0 && nx < 1.0 {
                *x = nx;
            }
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = jacobi_with_derivative(n, alpha, beta, *x);
        *w = (ln_c - ((1.0 - *x * *x) * dp * dp).ln()).exp();
    }
    Ok((nodes, weights))
}

fn jacobi_with_derivative(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let ab = a + b;
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (a - b + (ab + 2.0) * x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let c1 = 2.0 * kf * (kf + ab) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let s = 2.0 * nf + ab;
    let dp = (nf * ((a - b) - s * x) * p1 + 2.0 * (nf + a) * (nf + b) * p0) / (s * (1.0 - x * x));
    (p1, dp)
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with Wilkinson
/// shifts). `off[i]` couples rows `i` and `i+1`; both slices are destroyed.
pub fn symmetric_tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let e = off;
    if n > 1 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence("tridiagonal QL iteration".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(diag.to_vec())
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels of
/// `order` nodes each.
pub fn gl_panels(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Composite rule whose panels are no wider than `max_width`.
pub fn gl_panels_max_width(a: f64, b: f64, max_width: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    gl_panels(a, b, panels, order)
}

/// Settings for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_refinements: 30,
        }
    }
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.x
            .iter()
            .zip(&self.w)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

/// Adaptive bisection with a 16-point Gauss–Legendre rule. A panel is accepted
/// when its two halves agree with the whole to within the panel's share of the
/// tolerance.
pub fn adaptive_gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (x, w) = gauss_legendre(16);
    let rule = Rule { x, w };
    let mut stack = vec![(a, b, rule.apply(&mut f, a, b), 0usize)];
    let mut total = 0.0;
    let mut worst = 0.0_f64;
    let width = (b - a).abs();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.apply(&mut f, lo, mid);
        let right = rule.apply(&mut f, mid, hi);
        let err = (left + right - whole).abs();
        let share = cfg.abs_tol * ((hi - lo).abs() / width).max(1e-3);
        if err <= share || (hi - lo).abs() < 1e-15 * width.max(1.0) {
            total += left + right;
        } else if depth >= cfg.max_refinements {
            worst = worst.max(err);
            total += left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if worst > cfg.abs_tol {
        return Err(Error::NonIntegrable {
            tol: cfg.abs_tol,
            refinements: cfg.max_refinements,
            estimate: total,
        });
    }
    Ok(total)
}

/// Gauss–Legendre rule on `[a, b]` with `n` nodes.
pub fn gl_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|t| h * t).collect())
}
