//! Experiments built on the discretizations: ln α scaling of the entropic
//! difference, Widom comparisons, the u₀ limit of the full path, Schatten
//! growth of the projection commutator and entropy aggregation.

use crate::angular::AngularMode;
use crate::entropy::{u_functional, SpectralFunction};
use crate::error::{Error, Result};
use crate::frequency::{full_path_basis, FullPathBasis, full_path_difference, limiting_frequency_difference, FrequencyGridSpec, FullPathSpec};
use crate::geometry::BlackHole;
use crate::kernels::limiting_kernel;
use crate::opalpha::{default_node_count, nystrom_discretize_fn, nystrom_real_form, projection_window_kernel, Interval, NodeRule};
use crate::quadrature::{adaptive_gl, gl_panels, QuadratureConfig};
use crate::radial::T12Strategy;
use crate::spectral::{
    hermitian_eigenvalues, init_backend, schatten_from_gram_eigenvalues, symmetric_eigenvalues, trace_of_spectrum,
    EntropicDifferenceResult,
};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of a scaling study in `ln α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudyConfig {
    pub mass: f64,
    pub m: f64,
    /// `None` selects the limiting path.
    pub mode: Option<AngularMode>,
    pub rho: f64,
    pub alpha_list: Vec<f64>,
    pub rule: NodeRule,
    pub t12: T12Strategy,
    /// Right end of `Λ`; only the full path depends on it.
    pub u0: f64,
}

impl ScalingStudyConfig {
    pub fn limiting(mass: f64, rho: f64, alpha_list: Vec<f64>) -> Self {
        Self {
            mass,
            m: 0.0,
            mode: None,
            rho,
            alpha_list,
            rule: NodeRule::GaussLegendre,
            t12: T12Strategy::Zero,
            u0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !(self.rho > 0.0) {
            return Err(Error::Domain(format!("need M > 0 and ρ > 0, got M={} ρ={}", self.mass, self.rho)));
        }
        if self.alpha_list.len() < 2 {
            return Err(Error::Domain("a scaling study needs at least two values of α".into()));
        }
        if self.alpha_list[0] < 2.0 || self.alpha_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!("α list must be strictly increasing from α ≥ 2: {:?}", self.alpha_list)));
        }
        Ok(())
    }

    pub fn region(&self) -> Result<Interval> {
        Interval::new(self.u0, self.rho)
    }
}

/// Least-squares line of a quantity against `ln α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope.
    pub slope_err: f64,
    pub residuals: Vec<f64>,
}

/// Fits `y = slope · ln α + intercept`.
pub fn regress_ln_alpha(alphas: &[f64], values: &[f64]) -> Result<RegressionResult> {
    if alphas.len() != values.len() || alphas.len() < 2 {
        return Err(Error::Domain(format!("regression needs ≥ 2 matching points, got {} and {}", alphas.len(), values.len())));
    }
    let x: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(values).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = values.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("α values must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(values).map(|(a, b)| b - (slope * a + intercept)).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_err = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        slope_err,
        residuals,
    })
}

/// Per-α results together with their fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub results: Vec<EntropicDifferenceResult>,
    pub fit: RegressionResult,
}

impl ScalingStudy {
    fn from_results(results: Vec<EntropicDifferenceResult>) -> Result<Self> {
        let a: Vec<f64> = results.iter().map(|r| r.alpha).collect();
        let d: Vec<f64> = results.iter().map(|r| r.d_value).collect();
        let fit = regress_ln_alpha(&a, &d)?;
        Ok(Self { results, fit })
    }
}

/// The limiting path: each channel separately and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingScaling {
    pub channels: [ScalingStudy; 2],
    pub total: ScalingStudy,
}

/// `∫₀¹ f(s)/s ds`, the diagonal density of `f(Op_α(𝔞₀,j))` in units of
/// `α/(2πM)`.
pub fn masked_density(f: &SpectralFunction) -> Result<f64> {
    let q = QuadratureConfig::default();
    // s = e^t; below t = -60 the integrand is below 1e-26 for f(s) ≤ s
    let lo = adaptive_gl(|t| f.eval(t.exp()), -60.0, 0.5_f64.ln(), &q)?;
    Ok(lo + adaptive_gl(|t| f.eval(t.exp()), 0.5_f64.ln(), 0.0, &q)?)
}

/// Entropic difference of one limiting channel on `region` by Nyström
/// discretization. The masked term is the exact kernel diagonal of
/// `f(Op_α(𝔞₀,j))` times `ρ`; for η it equals `ραπ/(12M)`.
pub fn limiting_difference(
    which: u8,
    mass: f64,
    alpha: f64,
    region: &Interval,
    f: &SpectralFunction,
    rule: NodeRule,
) -> Result<EntropicDifferenceResult> {
    let n = default_node_count(alpha, region.rho).max(16);
    let kernel = |u: f64, up: f64| limiting_kernel(which, mass, alpha, u, up);
    let ev = match rule {
        NodeRule::GaussLegendre => symmetric_eigenvalues(&nystrom_real_form(kernel, region, n))?,
        NodeRule::Trapezoid => {
            let op = nystrom_discretize_fn(kernel, region, n, rule, alpha, "limiting")?;
            hermitian_eigenvalues(&op.matrix)?
        }
    };
    let restricted = trace_of_spectrum(&ev.eigenvalues, f, true);
    let masked = region.rho * alpha / (2.0 * PI * mass) * masked_density(f)?;
    Ok(EntropicDifferenceResult {
        alpha,
        region: *region,
        trace_restricted: restricted,
        trace_masked: masked,
        d_value: restricted - masked,
        kernel_id: format!("limiting-{which}:M={mass}"),
    })
}

fn sum_results(a: &EntropicDifferenceResult, b: &EntropicDifferenceResult) -> EntropicDifferenceResult {
    EntropicDifferenceResult {
        alpha: a.alpha,
        region: a.region,
        trace_restricted: a.trace_restricted + b.trace_restricted,
        trace_masked: a.trace_masked + b.trace_masked,
        d_value: a.d_value + b.d_value,
        kernel_id: format!("limiting-matrix:M={}", a.kernel_id.rsplit("M=").next().unwrap_or("?")),
    }
}

/// `tr D_α(f, Λ, 𝔄₀)` over the α list, per channel and in total.
pub fn scaling_study_limiting(cfg: &ScalingStudyConfig, f: &SpectralFunction) -> Result<LimitingScaling> {
    cfg.validate()?;
    let region = cfg.region()?;
    let mut per = [Vec::new(), Vec::new()];
    for &alpha in &cfg.alpha_list {
        for which in [1u8, 2] {
            per[which as usize - 1].push(limiting_difference(which, cfg.mass, alpha, &region, f, cfg.rule)?);
        }
    }
    let total: Vec<EntropicDifferenceResult> = per[0].iter().zip(&per[1]).map(|(a, b)| sum_results(a, b)).collect();
    let [c1, c2] = per;
    Ok(LimitingScaling {
        channels: [ScalingStudy::from_results(c1)?, ScalingStudy::from_results(c2)?],
        total: ScalingStudy::from_results(total)?,
    })
}

/// Predicted and measured ln α coefficients for a smooth `f` on one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidomComparison {
    pub predicted_slope: f64,
    pub measured: ScalingStudy,
}

impl WidomComparison {
    pub fn relative_error(&self) -> f64 {
        (self.measured.fit.slope - self.predicted_slope).abs() / self.predicted_slope.abs()
    }
}

/// Compares the measured slope of one limiting channel with `U(1; f)/(2π²)`.
pub fn widom_prediction(f: &SpectralFunction, which: u8, cfg: &ScalingStudyConfig) -> Result<WidomComparison> {
    cfg.validate()?;
    let predicted_slope = u_functional(f, 1.0, &QuadratureConfig::default())? / (2.0 * PI * PI);
    let region = cfg.region()?;
    let mut results = Vec::new();
    for &alpha in &cfg.alpha_list {
        results.push(limiting_difference(which, cfg.mass, alpha, &region, f, cfg.rule)?);
    }
    Ok(WidomComparison {
        predicted_slope,
        measured: ScalingStudy::from_results(results)?,
    })
}

/// One entry of the u₀ table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U0Row {
    pub u0: f64,
    pub t12: (f64, f64),
    pub d_value: f64,
    pub trace_restricted: f64,
    pub trace_masked: f64,
    pub remainder_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U0Study {
    pub alpha: f64,
    pub rho: f64,
    pub rows: Vec<U0Row>,
    /// `|d(u₀_last) - d(u₀_prev)| / |d(u₀_last)|` for the first strategy.
    pub stabilization: f64,
    /// `(max - min)/|mean|` of `d` across strategies at the last `u₀`.
    pub spread: f64,
}

impl U0Study {
    pub fn d_at(&self, u0: f64, strategy_index: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.u0 == u0)
            .nth(strategy_index)
            .map(|r| r.d_value)
    }
}

/// Full-path `d(u₀)` for every `u₀` and `t₁₂` strategy. The channel bases
/// are built once; only the coupling depends on `u₀` and `t₁₂`.
#[allow(clippy::too_many_arguments)]
pub fn u0_limit_study_full(
    mode: &AngularMode,
    bh: &BlackHole,
    m: f64,
    eps: f64,
    u0_list: &[f64],
    rho: f64,
    strategies: &[T12Strategy],
    grid: &FrequencyGridSpec,
) -> Result<U0Study> {
    check_u0_inputs(u0_list, strategies, bh)?;
    let mut spec = FullPathSpec::new(m, eps);
    spec.grid = *grid;
    let basis = full_path_basis(mode, bh, rho, &spec)?;
    u0_limit_study_on_basis(&basis, u0_list, strategies)
}

fn check_u0_inputs(u0_list: &[f64], strategies: &[T12Strategy], bh: &BlackHole) -> Result<()> {
    if u0_list.is_empty() || strategies.is_empty() {
        return Err(Error::Domain("u₀ study needs at least one u₀ and one strategy".into()));
    }
    if u0_list.windows(2).any(|w| w[1] >= w[0]) || u0_list[0] > -10.0 * bh.mass {
        return Err(Error::Domain(format!("u₀ list must decrease from at most -10M: {u0_list:?}")));
    }
    Ok(())
}

/// The u₀ study on channel bases built elsewhere.
pub fn u0_limit_study_on_basis(basis: &FullPathBasis, u0_list: &[f64], strategies: &[T12Strategy]) -> Result<U0Study> {
    check_u0_inputs(u0_list, strategies, &basis.bh)?;
    let f = SpectralFunction::eta();
    let mut rows = Vec::new();
    for &u0 in u0_list {
        let region = Interval::new(u0, basis.rho)?;
        for s in strategies {
            let r = full_path_difference(basis, &region, s.value(), &f)?;
            rows.push(U0Row {
                u0,
                t12: r.t12,
                d_value: r.result.d_value,
                trace_restricted: r.result.trace_restricted,
                trace_masked: r.result.trace_masked,
                remainder_bound: r.remainder_bound,
            });
        }
    }
    let ns = strategies.len();
    let last = &rows[rows.len() - ns..];
    let stabilization = if u0_list.len() >= 2 {
        let prev = rows[rows.len() - 2 * ns].d_value;
        (last[0].d_value - prev).abs() / last[0].d_value.abs()
    } else {
        0.0
    };
    let vals: Vec<f64> = last.iter().map(|r| r.d_value).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let spread = (vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min)) / mean.abs();
    Ok(U0Study {
        alpha: basis.bh.mass / basis.spec.eps,
        rho: basis.rho,
        rows,
        stabilization,
        spread,
    })
}

/// Full path against the limiting path on the same interval and frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathComparison {
    pub alpha: f64,
    pub full: f64,
    pub limiting: f64,
    pub relative_difference: f64,
    pub remainder_bound: f64,
}

pub fn compare_full_with_limiting(
    mode: &AngularMode,
    bh: &BlackHole,
    m: f64,
    eps: f64,
    region: &Interval,
    t12: &T12Strategy,
    grid: &FrequencyGridSpec,
) -> Result<PathComparison> {
    let mut spec = FullPathSpec::new(m, eps);
    spec.grid = *grid;
    let basis = full_path_basis(mode, bh, region.rho, &spec)?;
    let f = SpectralFunction::eta();
    let full = full_path_difference(&basis, region, t12.value(), &f)?;
    let alpha = bh.mass / eps;
    let lim = limiting_frequency_difference(bh.mass, alpha, region, &f, grid)?;
    Ok(PathComparison {
        alpha,
        full: full.result.d_value,
        limiting: lim.d_value,
        relative_difference: (full.result.d_value - lim.d_value).abs() / lim.d_value.abs(),
        remainder_bound: full.remainder_bound,
    })
}

/// `‖χ_K P_{J,α} (1 - χ_K)‖_q^q` for each α, with the complement cut to a
/// padded interval, and its fit against ln α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenGrowth {
    pub q: f64,
    pub padding: f64,
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: RegressionResult,
    /// Relative change at the smallest α when the padding is doubled.
    pub padding_doubling_change: f64,
}

/// Settings for the padded commutator discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenGrowthSpec {
    /// Padding on each side, in units of `|K|`.
    pub padding: f64,
    /// Nodes per wavelength `2π/(α max|J|)`.
    pub nodes_per_wavelength: f64,
    pub order: usize,
}

impl Default for SchattenGrowthSpec {
    fn default() -> Self {
        Self {
            padding: 5.0,
            nodes_per_wavelength: 10.0,
            order: 16,
        }
    }
}

fn panel_rule(a: f64, b: f64, density: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = ((b - a) * density).ceil() as usize;
    gl_panels(a, b, n.div_ceil(order).max(1), order)
}

/// `‖χ_K P_{J,α} χ_{K⁺∖K}‖_q^q` by accumulating `T T*` over column blocks.
pub fn padded_commutator_q_power(k: &Interval, window: (f64, f64), alpha: f64, q: f64, spec: &SchattenGrowthSpec) -> Result<f64> {
    if !(window.0 < window.1) {
        return Err(Error::Domain(format!("window must satisfy j1 < j2, got {window:?}")));
    }
    let len = k.rho;
    let pad = spec.padding * len;
    let freq = alpha * window.0.abs().max(window.1.abs());
    let density = spec.nodes_per_wavelength * freq / (2.0 * PI);
    let (u, wu) = panel_rule(k.lo(), k.hi(), density, spec.order);
    let (mut v, mut wv) = panel_rule(k.lo() - pad, k.lo(), density, spec.order);
    let (v2, wv2) = panel_rule(k.hi(), k.hi() + pad, density, spec.order);
    v.extend(v2);
    wv.extend(wv2);
    let su: Vec<f64> = wu.iter().map(|w| w.sqrt()).collect();
    let nu = u.len();
    init_backend();
    let mut gram = Mat::<C64>::zeros(nu, nu);
    let block = 2048;
    let mut start = 0;
    while start < v.len() {
        let end = (start + block).min(v.len());
        let t = Mat::<C64>::from_fn(nu, end - start, |i, j| {
            let jj = start + j;
            projection_window_kernel(window, alpha, u[i], v[jj]) * (su[i] * wv[jj].sqrt())
        });
        gram += &t * t.adjoint();
        start = end;
    }
    let ev = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(schatten_from_gram_eigenvalues(ev, q).q_power())
}

/// `Σ (λ(1-λ))^{q/2}` over the eigenvalues `λ` of `χ_K P χ_K`. Because
/// `P` is a projection, `T T* = χ_K P χ_K - (χ_K P χ_K)²` for the unpadded
/// complement, so no padding is involved.
pub fn commutator_q_power_from_restriction(k: &Interval, window: (f64, f64), alpha: f64, q: f64, spec: &SchattenGrowthSpec) -> Result<f64> {
    let freq = alpha * window.0.abs().max(window.1.abs());
    let density = spec.nodes_per_wavelength * freq / (2.0 * PI);
    let (u, w) = panel_rule(k.lo(), k.hi(), density, spec.order);
    let n = u.len();
    let a = Mat::<C64>::from_fn(n, n, |i, j| projection_window_kernel(window, alpha, u[i], u[j]) * (w[i] * w[j]).sqrt());
    let ev = hermitian_eigenvalues(&a)?;
    Ok(ev
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.clamp(0.0, 1.0);
            (l * (1.0 - l)).powf(0.5 * q)
        })
        .sum())
}

pub fn schatten_growth_study(k: &Interval, window: (f64, f64), q: f64, alpha_list: &[f64], spec: &SchattenGrowthSpec) -> Result<SchattenGrowth> {
    if spec.padding < 5.0 {
        return Err(Error::Domain(format!("padding must be at least 5|K|, got {}", spec.padding)));
    }
    let mut values = Vec::new();
    for &alpha in alpha_list {
        values.push(padded_commutator_q_power(k, window, alpha, q, spec)?);
    }
    let fit = regress_ln_alpha(alpha_list, &values)?;
    let doubled = SchattenGrowthSpec {
        padding: 2.0 * spec.padding,
        ..*spec
    };
    let v2 = padded_commutator_q_power(k, window, alpha_list[0], q, &doubled)?;
    Ok(SchattenGrowth {
        q,
        padding: spec.padding,
        alphas: alpha_list.to_vec(),
        values: values.clone(),
        fit,
        padding_doubling_change: (v2 - values[0]).abs() / values[0].abs(),
    })
}

/// `S_kn = slope / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntropy {
    pub k: f64,
    pub n: usize,
    pub s_kn: f64,
    pub study: ScalingStudy,
}

/// Runs the scaling study of `cfg` and halves its slope. Without a mode the
/// limiting path is used; with a mode the full path on `(u₀ - ρ, u₀)`.
pub fn mode_entropy(cfg: &ScalingStudyConfig, mass_mode: Option<&BlackHole>) -> Result<ModeEntropy> {
    cfg.validate()?;
    let f = SpectralFunction::eta();
    let study = match (cfg.mode, mass_mode) {
        (None, _) => scaling_study_limiting(cfg, &f)?.total,
        (Some(mode), bh) => {
            let bh = match bh {
                Some(b) => *b,
                None => BlackHole::new(cfg.mass)?,
            };
            let region = cfg.region()?;
            let mut results = Vec::new();
            for &alpha in &cfg.alpha_list {
                let basis = full_path_basis(&mode, &bh, cfg.rho, &FullPathSpec::new(cfg.m, cfg.mass / alpha))?;
                results.push(full_path_difference(&basis, &region, cfg.t12.value(), &f)?.result);
            }
            ScalingStudy::from_results(results)?
        }
    };
    let (k, n) = cfg.mode.map(|m| (m.k, m.n)).unwrap_or((f64::NAN, 0));
    Ok(ModeEntropy {
        k,
        n,
        s_kn: 0.5 * study.fit.slope,
        study,
    })
}

/// Bekenstein–Hawking-type aggregate `count / 6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BHEntropyResult {
    pub occupied_count: u64,
    pub s_bh: f64,
    /// The count came from `M²/ε²` rather than being given.
    pub heuristic: bool,
}

pub fn bh_entropy(count: u64) -> BHEntropyResult {
    BHEntropyResult {
        occupied_count: count,
        s_bh: count as f64 / 6.0,
        heuristic: false,
    }
}

/// Occupied-mode count `round(M²/ε²)`.
pub fn bh_entropy_heuristic(mass: f64, eps: f64) -> Result<BHEntropyResult> {
    if !(eps > 0.0) || !(mass > 0.0) {
        return Err(Error::Domain(format!("need M > 0 and ε > 0, got M={mass} ε={eps}")));
    }
    let count = (mass * mass / (eps * eps)).round() as u64;
    Ok(BHEntropyResult {
        heuristic: true,
        ..bh_entropy(count)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_line() {
        let a = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = a.iter().map(|x: &f64| 0.25 * x.ln() - 1.0).collect();
        let r = regress_ln_alpha(&a, &y).unwrap();
        assert!((r.slope - 0.25).abs() < 1e-14 && (r.intercept + 1.0).abs() < 1e-13);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert!(regress_ln_alpha(&a[..1], &y[..1]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ScalingStudyConfig::limiting(1.0, 1.0, vec![4.0, 2.0]).validate().is_err());
        assert!(ScalingStudyConfig::limiting(1.0, 1.0, vec![1.0, 2.0]).validate().is_err());
        assert!(ScalingStudyConfig::limiting(1.0, -1.0, vec![2.0, 4.0]).validate().is_err());
        assert!(ScalingStudyConfig::limiting(1.0, 1.0, vec![2.0, 4.0]).validate().is_ok());
    }

    #[test]
    fn masked_density_values() {
        let d = masked_density(&SpectralFunction::eta()).unwrap();
        assert!((d - PI * PI / 6.0).abs() < 1e-9);
        assert!((masked_density(&SpectralFunction::quadratic()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linear_function_gives_zero_difference() {
        let reg = Interval::new(0.0, 1.0).unwrap();
        let r = limiting_difference(1, 1.0, 16.0, &reg, &SpectralFunction::identity(), NodeRule::GaussLegendre).unwrap();
        assert!(r.d_value.abs() < 1e-9, "{}", r.d_value);
    }

    #[test]
    fn small_scaling_study_is_increasing_and_positive() {
        let cfg = ScalingStudyConfig::limiting(1.0, 1.0, vec![4.0, 8.0, 16.0, 32.0, 64.0]);
        let s = scaling_study_limiting(&cfg, &SpectralFunction::eta()).unwrap();
        let d: Vec<f64> = s.total.results.iter().map(|r| r.d_value).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
        // the two channels are complex conjugates of each other
        for (a, b) in s.channels[0].results.iter().zip(&s.channels[1].results) {
            assert!((a.d_value - b.d_value).abs() < 1e-9);
        }
        assert!(s.total.fit.slope > 0.2 && s.total.fit.slope < 0.45, "{:?}", s.total.fit);
    }

    #[test]
    fn residuals_shrink_when_lowest_alpha_dropped() {
        let f = SpectralFunction::eta();
        let all = ScalingStudyConfig::limiting(1.0, 1.0, vec![2.0, 4.0, 8.0, 16.0, 32.0]);
        let s = scaling_study_limiting(&all, &f).unwrap();
        let rms = |r: &[f64]| (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt();
        let tail = regress_ln_alpha(
            &all.alpha_list[1..],
            &s.channels[0].results[1..].iter().map(|r| r.d_value).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(rms(&tail.residuals) < rms(&s.channels[0].fit.residuals));
    }

    #[test]
    fn translation_leaves_limiting_values_unchanged() {
        let f = SpectralFunction::eta();
        let a = limiting_difference(1, 1.0, 24.0, &Interval::new(0.0, 1.0).unwrap(), &f, NodeRule::GaussLegendre).unwrap();
        let b = limiting_difference(1, 1.0, 24.0, &Interval::new(-17.5, 1.0).unwrap(), &f, NodeRule::GaussLegendre).unwrap();
        assert!((a.d_value - b.d_value).abs() < 1e-10);
    }

    #[test]
    fn padded_commutator_agrees_with_restriction_identity() {
        let k = Interval::new(0.0, 1.0).unwrap();
        let spec = SchattenGrowthSpec::default();
        let exact = commutator_q_power_from_restriction(&k, (0.0, 1.0), 16.0, 1.0, &spec).unwrap();
        let p5 = padded_commutator_q_power(&k, (0.0, 1.0), 16.0, 1.0, &spec).unwrap();
        let p10 = padded_commutator_q_power(&k, (0.0, 1.0), 16.0, 1.0, &SchattenGrowthSpec { padding: 10.0, ..spec }).unwrap();
        assert!(p5 < p10 && p10 < exact + 1e-9, "{p5} {p10} {exact}");
        assert!((exact - p10) < (exact - p5));
        assert!((exact - p5) / exact < 0.1);
        assert!(p5 > 0.0 && padded_commutator_q_power(&k, (0.0, 1.0), 2.0, 1.0, &spec).unwrap() > 0.0);
    }

    #[test]
    fn bh_entropy_examples() {
        assert!((bh_entropy(100).s_bh - 100.0 / 6.0).abs() < 1e-15);
        assert_eq!(bh_entropy(0).s_bh, 0.0);
        let h = bh_entropy_heuristic(1.0, 0.1).unwrap();
        assert_eq!(h.occupied_count, 100);
        assert_eq!(h.s_bh, 100.0 / 6.0);
        assert!(h.heuristic);
        assert!(bh_entropy_heuristic(1.0, 0.0).is_err());
    }
}
