//! Restricted projection-type operators discretized in frequency space.
//!
//! An operator `K = ∫ w(ω) |φ_ω⟩⟨φ_ω| dω` restricted to `Λ` has the nonzero
//! spectrum of its Gram operator `√w(ω) ⟨φ_ω, χ_Λ φ_ω'⟩ √w(ω')`. For plane
//! waves the inner product is a sinc kernel, so each spinor channel reduces to
//! a real symmetric matrix. The weight `e^{εω}` is cut at `e^{εω_min} = τ`;
//! the masked term uses the same cut.
//!
//! The two channels of the full kernel are coupled by a Hankel kernel in
//! `u + u'`, which is smooth on `Λ × Λ` away from the horizon. It is expanded
//! in Legendre polynomials on `Λ`, whose Fourier transforms are spherical
//! Bessel functions, and added in the basis of channel eigenfunctions.

use crate::angular::AngularMode;
use crate::entropy::SpectralFunction;
use crate::error::{Error, Result};
use crate::geometry::BlackHole;
use crate::kernels::Weight;
use crate::opalpha::Interval;
use crate::quadrature::{adaptive_gl, gauss_legendre, gl_panels, QuadratureConfig};
use crate::radial::{evanescent_horizon_data, AsymptoticBound, RadialConfig, State};
use crate::spectral::{hermitian_eigenvalues, symmetric_eigen, symmetric_eigenvalues, trace_of_spectrum, EntropicDifferenceResult};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Resolution of the frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGridSpec {
    /// Cut of the weight: frequencies with `e^{εω} < τ` are dropped.
    pub tau: f64,
    /// Nodes per period `4π/ρ` of the sinc kernel.
    pub nodes_per_wavelength: f64,
    pub order: usize,
    /// Eigenvalues below this fraction of the largest are dropped from the
    /// channel bases.
    pub keep_ratio: f64,
}

impl Default for FrequencyGridSpec {
    fn default() -> Self {
        Self {
            tau: 1e-4,
            nodes_per_wavelength: 5.0,
            order: 16,
            keep_ratio: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub omega_min: f64,
}

/// Gauss–Legendre panels on `(ω_min, 0)`, split at `-m` when `m > 0`.
pub fn frequency_grid(eps: f64, m: f64, rho: f64, spec: &FrequencyGridSpec) -> Result<FrequencyGrid> {
    if !(eps > 0.0) || !(rho > 0.0) || !(spec.tau > 0.0 && spec.tau < 1.0) {
        return Err(Error::Domain(format!("frequency grid needs ε > 0, ρ > 0, 0 < τ < 1 (ε={eps}, ρ={rho}, τ={})", spec.tau)));
    }
    let omega_min = spec.tau.ln() / eps;
    let wl = 4.0 * PI / rho;
    let mut cuts = vec![omega_min];
    if m > 0.0 && -m > omega_min {
        cuts.push(-m);
    }
    cuts.push(0.0);
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for seg in cuts.windows(2) {
        let n = ((seg[1] - seg[0]) / wl * spec.nodes_per_wavelength).ceil() as usize;
        let panels = n.div_ceil(spec.order).max(1);
        let (x, w) = gl_panels(seg[0], seg[1], panels, spec.order);
        nodes.extend(x);
        weights.extend(w);
    }
    Ok(FrequencyGrid { nodes, weights, omega_min })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `q_k q_l ρ sinc((ω_k - ω_l) ρ/2)`.
fn sinc_gram(nodes: &[f64], q: &[f64], rho: f64) -> Mat<f64> {
    let n = nodes.len();
    Mat::from_fn(n, n, |k, l| q[k] * q[l] * rho * sinc(0.5 * rho * (nodes[k] - nodes[l])))
}

/// `∫_{ln τ}^0 f(e^t) dt = ∫_τ^1 f(s)/s ds`.
pub fn truncated_weight_integral(f: &SpectralFunction, tau: f64, quad: &QuadratureConfig) -> Result<f64> {
    let a = tau.ln();
    let mid = 0.5_f64.ln().max(a);
    let lo = if a < mid { adaptive_gl(|t| f.eval(t.exp()), a, mid, quad)? } else { 0.0 };
    Ok(lo + adaptive_gl(|t| f.eval(t.exp()), mid, 0.0, quad)?)
}

/// Entropic difference of the limiting operator `diag(Op(𝔞₀,₁), Op(𝔞₀,₂))`
/// on an interval of length `ρ`, with the weight cut at `τ`. Both channels
/// have the same spectrum.
pub fn limiting_frequency_difference(
    mass: f64,
    alpha: f64,
    region: &Interval,
    f: &SpectralFunction,
    spec: &FrequencyGridSpec,
) -> Result<EntropicDifferenceResult> {
    let eps = mass / alpha;
    let rho = region.rho;
    let grid = frequency_grid(eps, 0.0, rho, spec)?;
    let q: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(w, wt)| (wt * (eps * w).exp() / (2.0 * PI)).sqrt())
        .collect();
    let ev = symmetric_eigenvalues(&sinc_gram(&grid.nodes, &q, rho))?;
    let restricted = 2.0 * trace_of_spectrum(&ev.eigenvalues, f, true);
    let masked = 2.0 * rho / (2.0 * PI * eps) * truncated_weight_integral(f, spec.tau, &QuadratureConfig::default())?;
    Ok(EntropicDifferenceResult {
        alpha,
        region: *region,
        trace_restricted: restricted,
        trace_masked: masked,
        d_value: restricted - masked,
        kernel_id: format!("limiting-omega:M={mass}:tau={}", spec.tau),
    })
}

/// Settings of the full-path computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullPathSpec {
    pub m: f64,
    pub eps: f64,
    pub grid: FrequencyGridSpec,
    /// Legendre degree + 1 of the coupling expansion on `Λ`.
    pub coupling_degree: usize,
    pub radial: RadialConfig,
}

impl FullPathSpec {
    pub fn new(m: f64, eps: f64) -> Self {
        Self {
            m,
            eps,
            grid: FrequencyGridSpec::default(),
            coupling_degree: 24,
            radial: RadialConfig::default(),
        }
    }
}

/// Eigen-decomposition of one restricted channel in frequency space.
#[derive(Debug, Clone)]
struct Channel {
    mu: Vec<f64>,
    /// `ρ · j_n(ω_k ρ/2)` projected on the kept eigenvectors and divided by
    /// `√μ`: rows are eigenfunctions, columns Legendre degrees. The factor
    /// `iⁿ` is applied later.
    legendre: Mat<f64>,
}

/// The part of the full-path computation that does not depend on the
/// position of `Λ` or on `t₁₂`.
#[derive(Debug, Clone)]
pub struct FullPathBasis {
    pub spec: FullPathSpec,
    pub mode: AngularMode,
    pub bh: BlackHole,
    pub rho: f64,
    pub grid: FrequencyGrid,
    /// Band nodes `ω ∈ (-m, 0)` with quadrature weights and horizon data.
    pub band: Vec<(f64, f64, State)>,
    channels: [Channel; 2],
}

impl FullPathBasis {
    pub fn kept(&self) -> (usize, usize) {
        (self.channels[0].mu.len(), self.channels[1].mu.len())
    }
}

/// Outcome of a full-path evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullPathResult {
    pub result: EntropicDifferenceResult,
    pub t12: (f64, f64),
    /// Bound on `|f - f₀|` at the right end of `Λ`; terms carried by the
    /// remainder are not part of `d_value`.
    pub remainder_bound: f64,
    pub basis_size: (usize, usize),
}

/// Solves the radial problem on the evanescent band and diagonalizes both
/// channels. The weights are `e^{εω}/2` per channel for `ω < -m` and
/// `e^{εω}|f₀^±(ω)|²` on the band.
pub fn full_path_basis(mode: &AngularMode, bh: &BlackHole, rho: f64, spec: &FullPathSpec) -> Result<FullPathBasis> {
    full_path_basis_with(mode, bh, rho, spec, |w| evanescent_horizon_data(w, mode, spec.m, bh, &spec.radial))
}

/// As [`full_path_basis`], with the horizon data `f₀(ω)` on the band taken
/// from `horizon` (for instance a cache of radial solutions).
pub fn full_path_basis_with(
    mode: &AngularMode,
    bh: &BlackHole,
    rho: f64,
    spec: &FullPathSpec,
    mut horizon: impl FnMut(f64) -> Result<State>,
) -> Result<FullPathBasis> {
    let (m, eps) = (spec.m, spec.eps);
    let grid = frequency_grid(eps, m, rho, &spec.grid)?;
    let mut band = Vec::new();
    let mut s_plus = Vec::with_capacity(grid.nodes.len());
    let mut s_minus = Vec::with_capacity(grid.nodes.len());
    for (&w, &wt) in grid.nodes.iter().zip(&grid.weights) {
        if w < -m {
            s_plus.push(0.5);
            s_minus.push(0.5);
        } else {
            let f0 = horizon(w)?;
            s_plus.push(f0[0].norm_sqr());
            s_minus.push(f0[1].norm_sqr());
            band.push((w, wt, f0));
        }
    }
    let p = spec.coupling_degree;
    let jr = bessel_table(&grid.nodes, rho, p);
    let mut channels = Vec::with_capacity(2);
    for s in [&s_plus, &s_minus] {
        let q: Vec<f64> = (0..grid.nodes.len())
            .map(|k| (grid.weights[k] * (eps * grid.nodes[k]).exp() * s[k] / PI).sqrt())
            .collect();
        let (mu, v) = symmetric_eigen(&sinc_gram(&grid.nodes, &q, rho))?;
        let top = mu.iter().fold(0.0_f64, |a, &x| a.max(x));
        let keep: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > spec.grid.keep_ratio * top).collect();
        let vq = Mat::<f64>::from_fn(keep.len(), grid.nodes.len(), |i, k| v[(k, keep[i])] * q[k] / mu[keep[i]].sqrt());
        let legendre = &vq * &jr;
        channels.push(Channel {
            mu: keep.iter().map(|&i| mu[i]).collect(),
            legendre,
        });
    }
    let minus = channels.pop().expect("two channels");
    let plus = channels.pop().expect("two channels");
    Ok(FullPathBasis {
        spec: *spec,
        mode: *mode,
        bh: *bh,
        rho,
        grid,
        band,
        channels: [plus, minus],
    })
}

/// `ρ j_n(ω_k ρ/2)` for every node and `n < p`.
fn bessel_table(nodes: &[f64], rho: f64, p: usize) -> Mat<f64> {
    let mut t = Mat::<f64>::zeros(nodes.len(), p);
    for (k, &w) in nodes.iter().enumerate() {
        let j = spherical_bessel(p, 0.5 * rho * w);
        for n in 0..p {
            t[(k, n)] = rho * j[n];
        }
    }
    t
}

/// Spherical Bessel functions `j_0(x), …, j_{count-1}(x)`.
pub fn spherical_bessel(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let a = x.abs();
    if a == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let (s, c) = a.sin_cos();
    out[0] = s / a;
    if count > 1 {
        out[1] = if a < 0.5 {
            let mut term = a / 3.0;
            let mut sum = term;
            for k in 0..12 {
                term *= -a * a / ((2 * k + 2) * (2 * k + 5)) as f64;
                sum += term;
            }
            sum
        } else {
            s / (a * a) - c / a
        };
    }
    if a > count as f64 {
        for n in 1..count.saturating_sub(1) {
            out[n + 1] = (2 * n + 1) as f64 / a * out[n] - out[n - 1];
        }
    } else if count > 2 {
        // ratios r_n = j_n / j_{n-1} by downward continued fraction
        let start = count + 30 + a as usize;
        let mut r = 0.0;
        let mut ratios = vec![0.0; count];
        for n in (2..=start).rev() {
            r = 1.0 / ((2 * n + 1) as f64 / a - r);
            if n < count {
                ratios[n] = r;
            }
        }
        for n in 2..count {
            out[n] = ratios[n] * out[n - 1];
        }
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `P_0(x), …, P_{count-1}(x)`.
pub fn legendre_values(count: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; count];
    if count > 0 {
        p[0] = 1.0;
    }
    if count > 1 {
        p[1] = x;
    }
    for n in 1..count.saturating_sub(1) {
        p[n + 1] = ((2 * n + 1) as f64 * x * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
    }
    p
}

/// Coupling kernel `(1/π) ∫ e^{εω} c(ω) e^{-iω s} dω` at `s = u + u'`, with
/// `c = t₁₂` for `ω < -m` and `c = f₀⁺ conj(f₀⁻)` on the band.
pub fn coupling_kernel(basis: &FullPathBasis, t12: C64, s: f64) -> C64 {
    let eps = basis.spec.eps;
    let mut k = t12 * Weight::Exp.half_line_transform(eps, s) * 2.0;
    for &(w, wt, f0) in &basis.band {
        let c = f0[0] * f0[1].conj() - t12;
        k += c * C64::from_polar(wt * (eps * w).exp() / PI, -w * s);
    }
    k
}

/// Entropic difference of the full kernel restricted to `region`, using the
/// channel bases of `basis`.
pub fn full_path_difference(basis: &FullPathBasis, region: &Interval, t12: C64, f: &SpectralFunction) -> Result<FullPathResult> {
    if (region.rho - basis.rho).abs() > 1e-12 * basis.rho {
        return Err(Error::Domain(format!("basis built for ρ = {}, region has ρ = {}", basis.rho, region.rho)));
    }
    if t12.norm() > 0.5 {
        return Err(Error::ConstraintViolation(format!("|t12| = {} exceeds 1/2", t12.norm())));
    }
    let p = basis.spec.coupling_degree;
    let uc = region.u0 - 0.5 * region.rho;
    let (x, w) = gauss_legendre(p);
    let pv: Vec<Vec<f64>> = x.iter().map(|&xa| legendre_values(p, xa)).collect();
    let mut h = Mat::<C64>::zeros(p, p);
    for a in 0..p {
        for c in 0..p {
            let kv = coupling_kernel(basis, t12, 2.0 * uc + 0.5 * region.rho * (x[a] + x[c])) * (w[a] * w[c]);
            for n in 0..p {
                let t = kv * pv[a][n];
                for np in 0..p {
                    h[(n, np)] += t * pv[c][np];
                }
            }
        }
    }
    let ipow = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    for n in 0..p {
        for np in 0..p {
            let norm = (2 * n + 1) as f64 * (2 * np + 1) as f64 / 4.0;
            h[(n, np)] *= ipow[n % 4] * ipow[np % 4] * norm;
        }
    }
    let [plus, minus] = &basis.channels;
    let lp = Mat::<C64>::from_fn(plus.legendre.nrows(), p, |i, n| C64::new(plus.legendre[(i, n)], 0.0));
    let lm = Mat::<C64>::from_fn(minus.legendre.nrows(), p, |i, n| C64::new(minus.legendre[(i, n)], 0.0));
    let b = &lp * &h * lm.transpose();
    let (np_, nm) = (plus.mu.len(), minus.mu.len());
    let mut full = Mat::<C64>::zeros(np_ + nm, np_ + nm);
    for i in 0..np_ {
        full[(i, i)] = C64::new(plus.mu[i], 0.0);
    }
    for j in 0..nm {
        full[(np_ + j, np_ + j)] = C64::new(minus.mu[j], 0.0);
    }
    for i in 0..np_ {
        for j in 0..nm {
            full[(i, np_ + j)] = b[(i, j)];
            full[(np_ + j, i)] = b[(i, j)].conj();
        }
    }
    let ev = hermitian_eigenvalues(&full)?;
    let eps = basis.spec.eps;
    let restricted = trace_of_spectrum(&ev.eigenvalues, f, true);
    let masked = region.rho / (PI * eps) * truncated_weight_integral(f, basis.spec.grid.tau, &QuadratureConfig::default())?;
    let bound = AsymptoticBound::corrected(basis.spec.m, basis.mode.lambda, basis.bh.mass, region.hi(), 1.0);
    Ok(FullPathResult {
        result: EntropicDifferenceResult {
            alpha: basis.bh.mass / eps,
            region: *region,
            trace_restricted: restricted,
            trace_masked: masked,
            d_value: restricted - masked,
            kernel_id: format!("full-omega:M={}:m={}:k={}:n={}", basis.bh.mass, basis.spec.m, basis.mode.k, basis.mode.n),
        },
        t12: (t12.re, t12.im),
        remainder_bound: bound.value(region.hi()),
        basis_size: (np_, nm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{limiting_kernel, FullKernel, FullKernelSpec};
    use crate::opalpha::{default_node_count, nystrom_real_form};
    use crate::quadrature::gl_on;

    #[test]
    fn spherical_bessel_matches_fourier_integral() {
        // ∫_{-1}^{1} e^{ikx} P_n(x) dx = 2 iⁿ j_n(k)
        let (x, w) = gl_on(-1.0, 1.0, 400);
        for k in [-37.0, -2.5, 0.3, 3.14159, 9.0, 30.0, 150.0] {
            let j = spherical_bessel(24, k);
            for n in [0usize, 1, 2, 5, 11, 23] {
                let mut s = C64::new(0.0, 0.0);
                for (xi, wi) in x.iter().zip(&w) {
                    s += C64::from_polar(wi * legendre_values(24, *xi)[n], k * xi);
                }
                let want = C64::new(0.0, 1.0).powi(n as i32) * (2.0 * j[n]);
                assert!((s - want).norm() < 1e-12, "k={k} n={n}: {s} vs {want}");
            }
        }
        assert_eq!(spherical_bessel(3, 0.0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn grid_covers_cut() {
        let spec = FrequencyGridSpec::default();
        let g = frequency_grid(1.0 / 32.0, 0.1, 1.0, &spec).unwrap();
        let total: f64 = g.weights.iter().sum();
        assert!((total + g.omega_min).abs() < 1e-9);
        assert!(((1.0 / 32.0) * g.omega_min).exp() - 1e-4 < 1e-15);
        assert!(g.nodes.iter().all(|&w| w < 0.0 && w > g.omega_min));
        assert!(frequency_grid(0.0, 0.1, 1.0, &spec).is_err());
    }

    #[test]
    fn limiting_frequency_path_matches_position_space() {
        let f = SpectralFunction::eta();
        let (alpha, rho) = (32.0, 1.0);
        let reg = Interval::new(0.0, rho).unwrap();
        let d_omega = limiting_frequency_difference(1.0, alpha, &reg, &f, &FrequencyGridSpec::default()).unwrap();
        let n = default_node_count(alpha, rho);
        let r = nystrom_real_form(|u, up| limiting_kernel(1, 1.0, alpha, u, up), &reg, n);
        let ev = symmetric_eigenvalues(&r).unwrap();
        let d_pos = 2.0 * (trace_of_spectrum(&ev.eigenvalues, &f, true) - rho * alpha * PI / 12.0);
        assert!((d_omega.d_value - d_pos).abs() < 2e-3 * d_pos.abs(), "{} vs {d_pos}", d_omega.d_value);
    }

    #[test]
    fn full_path_without_band_or_coupling_is_limiting() {
        let bh = BlackHole::new(1.0).unwrap();
        let mode = AngularMode::with_lambda(0.5, 1, 1.5);
        let spec = FullPathSpec::new(0.0, 1.0 / 16.0);
        let basis = full_path_basis(&mode, &bh, 1.0, &spec).unwrap();
        let reg = Interval::new(-8.0, 1.0).unwrap();
        let f = SpectralFunction::eta();
        let full = full_path_difference(&basis, &reg, C64::new(0.0, 0.0), &f).unwrap();
        let lim = limiting_frequency_difference(1.0, 16.0, &reg, &f, &spec.grid).unwrap();
        assert!((full.result.d_value - lim.d_value).abs() < 1e-9, "{} {}", full.result.d_value, lim.d_value);
        assert!(full_path_difference(&basis, &reg, C64::new(0.6, 0.0), &f).is_err());
    }

    #[test]
    fn full_path_matches_position_space_nystrom() {
        // direct Nyström of the plane-wave kernel on Λ, both spinor channels
        let bh = BlackHole::new(1.0).unwrap();
        let mode = AngularMode::with_lambda(0.5, 1, 1.5);
        let (alpha, m, rho, u0) = (16.0, 0.3, 1.0, -5.0);
        let t12 = C64::new(0.0, 0.4);
        let spec = FullPathSpec::new(m, 1.0 / alpha);
        let basis = full_path_basis(&mode, &bh, rho, &spec).unwrap();
        let reg = Interval::new(u0, rho).unwrap();
        let f = SpectralFunction::eta();
        let fast = full_path_difference(&basis, &reg, t12, &f).unwrap();

        let mut kspec = FullKernelSpec::new(m, 1.0 / alpha);
        kspec.t12 = crate::radial::T12Strategy::constant(t12);
        kspec.omega_r = 0.0;
        let kernel = crate::kernels::assemble_full_kernel(&mode, &bh, &kspec, &reg).unwrap();
        let d_direct = direct_difference(&kernel, &reg, 12 * alpha as usize, &f);
        assert!(
            (fast.result.d_value - d_direct).abs() < 5e-3 * d_direct.abs(),
            "{} vs {d_direct}",
            fast.result.d_value
        );
    }

    fn direct_difference(kernel: &FullKernel, reg: &Interval, n: usize, f: &SpectralFunction) -> f64 {
        let (x, w) = gl_on(reg.lo(), reg.hi(), n);
        let mut a = Mat::<C64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let k = kernel.plane(x[i], x[j]);
                let s = (w[i] * w[j]).sqrt();
                for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    a[(bi * n + i, bj * n + j)] = k[bi][bj] * s;
                }
            }
        }
        let ev = hermitian_eigenvalues(&a).unwrap();
        let restricted = trace_of_spectrum(&ev.eigenvalues, f, true);
        // the direct kernel is not cut, so its masked term covers the half line
        let masked = reg.rho / (PI * kernel.spec.eps) * truncated_weight_integral(f, 1e-300, &QuadratureConfig::default()).unwrap();
        restricted - masked
    }
}
