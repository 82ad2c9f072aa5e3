//! Discretizations of `Op_α(a)`: Nyström matrices on intervals, and
//! antiperiodic (twisted) torus discretizations used for symbol-algebra checks.

use crate::entropy::eta;
use crate::error::{Error, Result};
use crate::kernels::{eta_limiting_kernel_closed, SymbolDescriptor};
use crate::quadrature::gl_on;
use crate::spectral::{centrohermitian_real_form, hermitian_eigenvalues, schatten_q_norm, symmetric_eigenvalues};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `Λ = (u0 - ρ, u0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub u0: f64,
    pub rho: f64,
}

impl Interval {
    pub fn new(u0: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !u0.is_finite() || !rho.is_finite() {
            return Err(Error::Domain(format!("interval needs finite u0 and rho > 0, got ({u0}, {rho})")));
        }
        Ok(Self { u0, rho })
    }

    pub fn lo(&self) -> f64 {
        self.u0 - self.rho
    }

    pub fn hi(&self) -> f64 {
        self.u0
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { u0: self.u0 + c, rho: self.rho }
    }

    pub fn contains(&self, u: f64) -> bool {
        u > self.lo() && u < self.hi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRule {
    GaussLegendre,
    Trapezoid,
}

/// Nyström matrix `√w_i K(u_i, u_j) √w_j` of a kernel on an interval.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: Mat<C64>,
    pub symmetrized: bool,
    pub region: Interval,
    pub alpha: f64,
    pub kernel_id: String,
}

/// `⌈12αρ/(2π)⌉ · 2π`, rounded up to an integer: twelve nodes per length `M/α`.
pub fn default_node_count(alpha: f64, rho: f64) -> usize {
    ((12.0 * alpha * rho / (2.0 * PI)).ceil() * 2.0 * PI).ceil() as usize
}

/// Nodes and weights of the chosen rule on the interval.
pub fn interval_rule(region: &Interval, n: usize, rule: NodeRule) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (region.lo(), region.hi());
    match rule {
        NodeRule::GaussLegendre => gl_on(a, b, n),
        NodeRule::Trapezoid => {
            let h = (b - a) / (n - 1) as f64;
            let x = (0..n).map(|i| a + h * i as f64).collect();
            let w = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
            (x, w)
        }
    }
}

/// Discretizes a scalar kernel family on `Λ`.
pub fn nystrom_discretize(kernel: &SymbolDescriptor, region: &Interval, n: usize, rule: NodeRule) -> Result<DiscretizedOperator> {
    let k = *kernel;
    let mut err = None;
    let op = nystrom_discretize_fn(
        |u, up| match k.eval(u, up) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                C64::new(f64::NAN, 0.0)
            }
        },
        region,
        n,
        rule,
        kernel.alpha,
        &kernel.id(),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(op),
    }
}

/// Discretizes an arbitrary scalar kernel on `Λ`.
pub fn nystrom_discretize_fn(
    mut kernel: impl FnMut(f64, f64) -> C64,
    region: &Interval,
    n: usize,
    rule: NodeRule,
    alpha: f64,
    id: &str,
) -> Result<DiscretizedOperator> {
    if n < 16 {
        return Err(Error::Domain(format!("Nyström needs at least 16 nodes, got {n}")));
    }
    let (x, w) = interval_rule(region, n, rule);
    let s: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut m = Mat::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = kernel(x[i], x[j]) * (s[i] * s[j]);
        }
    }
    Ok(DiscretizedOperator {
        nodes: x,
        weights: w,
        matrix: m,
        symmetrized: true,
        region: *region,
        alpha,
        kernel_id: id.to_string(),
    })
}

/// Real symmetric matrix with the spectrum of the Gauss–Legendre Nyström
/// matrix of a Hermitian translation-invariant kernel. Such kernels satisfy
/// `K(-Δ) = conj K(Δ)`, so the Nyström matrix on symmetric nodes is
/// centro-Hermitian.
pub fn nystrom_real_form(kernel: impl Fn(f64, f64) -> C64, region: &Interval, n: usize) -> Mat<f64> {
    let (x, w) = interval_rule(region, n, NodeRule::GaussLegendre);
    let s: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    centrohermitian_real_form(n, |i, j| kernel(x[i], x[j]) * (s[i] * s[j]))
}

/// Kernel of `Op_α(χ_J)`:
/// `(α/2π) (e^{-iα j1 Δ} - e^{-iα j2 Δ}) / (iαΔ)`, `Δ = u - u'`.
pub fn projection_window_kernel(window: (f64, f64), alpha: f64, u: f64, up: f64) -> C64 {
    let (j1, j2) = window;
    let x = alpha * (u - up);
    let pre = alpha / (2.0 * PI);
    if x.abs() * (j1.abs() + j2.abs()) < 1e-4 {
        // Taylor expansion of ∫_{j1}^{j2} e^{-ixξ} dξ
        let d1 = j2 - j1;
        let d2 = (j2 * j2 - j1 * j1) / 2.0;
        let d3 = (j2.powi(3) - j1.powi(3)) / 6.0;
        let d4 = (j2.powi(4) - j1.powi(4)) / 24.0;
        return C64::new(d1 - x * x * d3, -x * d2 + x.powi(3) * d4) * pre;
    }
    let num = C64::from_polar(1.0, -x * j1) - C64::from_polar(1.0, -x * j2);
    num / C64::new(0.0, x) * pre
}

/// Result of comparing `χ_Λ Op(a) χ_Λ` with its translate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    pub shift: f64,
    pub trace: (f64, f64),
    /// `(q, ‖·‖_q on Λ, ‖·‖_q on Λ + c)`
    pub schatten: Vec<(f64, f64, f64)>,
}

impl TranslationReport {
    pub fn max_deviation(&self) -> f64 {
        let mut d = (self.trace.0 - self.trace.1).abs();
        for (_, a, b) in &self.schatten {
            d = d.max((a - b).abs());
        }
        d
    }
}

/// Discretizes `K` on `Λ` and `K(· - c, · - c)` on `Λ + c` with the same
/// rule and compares traces and Schatten norms for `q ∈ {0.5, 1}`.
pub fn translate_check(kernel: impl Fn(f64, f64) -> C64, region: &Interval, c: f64, n: usize) -> Result<TranslationReport> {
    let a = nystrom_discretize_fn(&kernel, region, n, NodeRule::GaussLegendre, 0.0, "base")?;
    let shifted = region.shifted(c);
    let b = nystrom_discretize_fn(|u, up| kernel(u - c, up - c), &shifted, n, NodeRule::GaussLegendre, 0.0, "shifted")?;
    let tr = |m: &Mat<C64>| (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>();
    let mut schatten = Vec::new();
    for q in [0.5, 1.0] {
        schatten.push((q, schatten_q_norm(&a.matrix, q)?.value, schatten_q_norm(&b.matrix, q)?.value));
    }
    Ok(TranslationReport {
        shift: c,
        trace: (tr(&a.matrix), tr(&b.matrix)),
        schatten,
    })
}

/// Equispaced grid on a circle of length `L` with antiperiodic boundary
/// conditions; the Fourier modes are `ξ_k = 2π(k + 1/2)/(αL)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub length: f64,
    pub n: usize,
}

impl TorusGrid {
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.length / self.n as f64).collect()
    }

    fn offsets(&self) -> Vec<f64> {
        let h = self.length / self.n as f64;
        (0..2 * self.n - 1).map(|d| (d as f64 - (self.n - 1) as f64) * h).collect()
    }

    /// Nyström matrix `(L/N) K(u_i - u_j)` of an antiperiodic kernel.
    pub fn kernel_matrix(&self, kernel: impl Fn(f64) -> C64) -> Mat<C64> {
        let n = self.n;
        let h = self.length / n as f64;
        let vals: Vec<C64> = self.offsets().iter().map(|&d| kernel(d) * h).collect();
        Mat::from_fn(n, n, |i, j| vals[i + n - 1 - j])
    }

    /// Matrix of the Fourier multiplier `b`, summing every mode `ξ_k` in
    /// `[lo, hi]`. Modes beyond the grid alias, as for the periodized kernel.
    pub fn symbol_matrix(&self, b: impl Fn(f64) -> f64, support: (f64, f64), alpha: f64) -> Mat<C64> {
        let n = self.n;
        let step = 2.0 * PI / (alpha * self.length);
        let k_lo = (support.0 / step - 0.5).floor() as i64;
        let k_hi = (support.1 / step - 0.5).ceil() as i64;
        let modes: Vec<(f64, f64)> = (k_lo..=k_hi)
            .map(|k| {
                let xi = step * (k as f64 + 0.5);
                (xi, if xi >= support.0 && xi <= support.1 { b(xi) } else { 0.0 })
            })
            .filter(|(_, v)| *v != 0.0)
            .collect();
        let vals: Vec<C64> = self
            .offsets()
            .iter()
            .map(|&d| modes.iter().map(|&(xi, v)| C64::from_polar(v, -alpha * xi * d)).sum::<C64>() / n as f64)
            .collect();
        Mat::from_fn(n, n, |i, j| vals[i + n - 1 - j])
    }
}

/// Antiperiodic image sum of the limiting kernel in closed form:
/// `Σ_n (-1)^n K(Δ + nL) = (i/(2L)) / sin(π(Δ + iM/α)/L)` for which = 1.
pub fn twisted_limiting_kernel(which: u8, mass: f64, alpha: f64, length: f64, delta: f64) -> C64 {
    let z = C64::new(delta, mass / alpha) * (PI / length);
    let k = C64::new(0.0, 1.0 / (2.0 * length)) / z.sin();
    if which == 2 {
        k.conj()
    } else {
        k
    }
}

/// Antiperiodic image sum `Σ_{|n| ≤ images} (-1)^n K(Δ + nL)`.
pub fn twisted_image_sum(kernel: impl Fn(f64) -> C64, length: f64, delta: f64, images: usize) -> C64 {
    let mut s = kernel(delta);
    for n in 1..=images {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let nl = n as f64 * length;
        s += (kernel(delta + nl) + kernel(delta - nl)) * sign;
    }
    s
}

/// A ξ-only symbol for the product check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProductSymbol {
    One,
    Limiting { which: u8, mass: f64 },
}

impl ProductSymbol {
    fn value(&self, xi: f64) -> f64 {
        match *self {
            ProductSymbol::One => 1.0,
            ProductSymbol::Limiting { which, mass } => SymbolDescriptor::limiting(which, mass, 1.0).symbol(xi),
        }
    }
}

fn identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
}

fn frobenius(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Relative Frobenius distance between `Op(a) Op(χ_J)` and `Op(a χ_J)` on a
/// twisted torus. `Op(a)` for the limiting symbol uses the closed-form image
/// sum, so the residual measures its aliasing; `J = None` is the full line.
pub fn symbol_product_check(a: ProductSymbol, window: Option<(f64, f64)>, alpha: f64, grid: &TorusGrid) -> f64 {
    let n = grid.n;
    let op_a = match a {
        ProductSymbol::One => identity(n),
        ProductSymbol::Limiting { which, mass } => {
            grid.kernel_matrix(|d| twisted_limiting_kernel(which, mass, alpha, grid.length, d))
        }
    };
    let (op_chi, op_prod) = match window {
        None => (identity(n), op_a.clone()),
        Some(j) => (
            grid.symbol_matrix(|_| 1.0, j, alpha),
            grid.symbol_matrix(|xi| a.value(xi), j, alpha),
        ),
    };
    let lhs = &op_a * &op_chi;
    let diff = &lhs - &op_prod;
    frobenius(&diff) / frobenius(&op_prod).max(f64::MIN_POSITIVE)
}

/// Comparison of `Op_α(η∘a)` with `η(Op_α(a))` on a matched torus grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMappingReport {
    /// `tr η(Op(a))` after clipping to `[0, 1]`.
    pub trace_eta_of_op: f64,
    /// `tr Op(η∘a)`.
    pub trace_op_of_eta: f64,
    pub relative_difference: f64,
    /// Largest gap between the sorted spectra.
    pub max_eigenvalue_gap: f64,
}

/// Discretizes `Op_α(𝔞₀,which)` from its closed-form antiperiodic kernel and
/// `Op_α(η(𝔞₀,which))` from the image sum of the closed-form η kernel.
pub fn spectral_mapping_check(which: u8, mass: f64, alpha: f64, grid: &TorusGrid, images: usize) -> Result<SpectralMappingReport> {
    let l = grid.length;
    let a = grid.kernel_matrix(|d| twisted_limiting_kernel(which, mass, alpha, l, d));
    let b = grid.kernel_matrix(|d| twisted_image_sum(|x| eta_limiting_kernel_closed(which, mass, alpha, x, 0.0), l, d, images));
    let sa = hermitian_eigenvalues(&a)?;
    let sb = hermitian_eigenvalues(&b)?;
    let mut mapped: Vec<f64> = sa.eigenvalues.iter().map(|&x| eta(x.clamp(0.0, 1.0))).collect();
    mapped.sort_by(|x, y| y.total_cmp(x));
    let t1: f64 = mapped.iter().sum();
    let t2: f64 = sb.eigenvalues.iter().sum();
    let gap = mapped
        .iter()
        .zip(&sb.eigenvalues)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(SpectralMappingReport {
        trace_eta_of_op: t1,
        trace_op_of_eta: t2,
        relative_difference: (t1 - t2).abs() / t2.abs(),
        max_eigenvalue_gap: gap,
    })
}

/// `N^{(n,m,k)}(b; l, r)` from sampled scaled derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolNormSpec {
    pub orders: (usize, usize, usize),
    pub scales: (f64, f64),
    pub value: f64,
}

/// Sampling grids and difference steps for [`symbol_norm`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSampling {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    pub step: f64,
}

fn central_difference(f: &dyn Fn(f64) -> C64, t: f64, order: usize, h: f64) -> C64 {
    if order == 0 {
        return f(t);
    }
    let g = |s: f64| central_difference(f, s, order - 1, h);
    (g(t + h) - g(t - h)) / (2.0 * h)
}

/// `max_{ñ≤n, m̃≤m, k̃≤k} l^{ñ+m̃} r^{k̃} sup |∂_x^ñ ∂_y^m̃ ∂_ξ^k̃ b|` over the
/// sampling grid, with derivatives by nested central differences.
pub fn symbol_norm(
    b: impl Fn(f64, f64, f64) -> C64,
    sampling: &SymbolSampling,
    orders: (usize, usize, usize),
    scales: (f64, f64),
) -> SymbolNormSpec {
    let (l, r) = scales;
    let h = sampling.step;
    let mut value = 0.0_f64;
    for nx in 0..=orders.0 {
        for ny in 0..=orders.1 {
            for nk in 0..=orders.2 {
                let mut sup = 0.0_f64;
                for &x in &sampling.x {
                    for &y in &sampling.y {
                        for &xi in &sampling.xi {
                            let fx = |xx: f64| {
                                let fy = |yy: f64| {
                                    let fk = |kk: f64| b(xx, yy, kk);
                                    central_difference(&fk, xi, nk, h)
                                };
                                central_difference(&fy, y, ny, h)
                            };
                            sup = sup.max(central_difference(&fx, x, nx, h).norm());
                        }
                    }
                }
                value = value.max(l.powi((nx + ny) as i32) * r.powi(nk as i32) * sup);
            }
        }
    }
    SymbolNormSpec { orders, scales, value }
}

/// Operator norm of the Gauss–Legendre Nyström discretization of a
/// limiting kernel on `Λ`.
pub fn limiting_operator_norm(which: u8, mass: f64, alpha: f64, region: &Interval, n: usize) -> Result<f64> {
    let r = nystrom_real_form(|u, up| crate::kernels::limiting_kernel(which, mass, alpha, u, up), region, n);
    let s = symmetric_eigenvalues(&r)?;
    Ok(s.eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs())))
}
