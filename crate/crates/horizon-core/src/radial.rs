//! Radial Dirac system in the Regge–Wheeler coordinate: fundamental
//! solutions, horizon data, asymptotic bounds and transmission coefficients.
//!
//! Solutions are stored through the amplitudes `f = (f⁺, f⁻)` of the ansatz
//! `X(u) = (e^{-iωu} f⁺(u), e^{iωu} f⁻(u))`, which satisfy
//! `f' = (√Δ/r²) [[0, e^{2iωu}(imr - λ)], [e^{-2iωu}(-imr - λ), 0]] f`.

use crate::angular::AngularMode;
use crate::error::{Error, Result};
use crate::geometry::{horizon_distance, BlackHole};
pub use crate::ode::State;
use crate::ode::{integrate, StepControl, Trajectory};
use crate::quadrature::gl_panels_max_width;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Integration settings shared by the radial solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialConfig {
    pub tol: f64,
    /// Deep-horizon start, in units of the black hole mass.
    pub u_start_over_m: f64,
    pub u_end_over_m: f64,
    /// Far-field start of the backward integration in the evanescent regime.
    pub u_max_over_m: f64,
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            u_start_over_m: -100.0,
            u_end_over_m: 0.0,
            u_max_over_m: 40.0,
        }
    }
}

/// `√Δ / r²` at Regge–Wheeler coordinate `u`.
pub fn coupling(u: f64, bh: &BlackHole) -> f64 {
    let x = horizon_distance(u, bh).unwrap_or(0.0);
    let r = 2.0 * bh.mass + x;
    (r * x).sqrt() / (r * r)
}

/// Right-hand side of the amplitude equation.
pub fn f_rhs(omega: f64, lambda: f64, m: f64, bh: &BlackHole, u: f64, f: &State) -> State {
    let x = horizon_distance(u, bh).unwrap_or(0.0);
    let r = 2.0 * bh.mass + x;
    let g = (r * x).sqrt() / (r * r);
    if g == 0.0 {
        return [ZERO, ZERO];
    }
    let ph = C64::from_polar(1.0, 2.0 * omega * u);
    let a = C64::new(-lambda, m * r);
    let b = C64::new(-lambda, -m * r);
    [ph * a * f[1] * g, ph.conj() * b * f[0] * g]
}

/// A solution of the radial system on an increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub omega: f64,
    pub lambda: f64,
    pub m: f64,
    pub bh: BlackHole,
    pub traj: Trajectory,
    /// Horizon limit, taken as the value at the lowest grid point.
    pub f0: State,
    pub tol: f64,
}

impl RadialSolution {
    pub fn grid(&self) -> &[f64] {
        &self.traj.u
    }

    pub fn f_plus(&self) -> Vec<C64> {
        self.traj.y.iter().map(|y| y[0]).collect()
    }

    pub fn f_minus(&self) -> Vec<C64> {
        self.traj.y.iter().map(|y| y[1]).collect()
    }

    pub fn u_start(&self) -> f64 {
        self.traj.u[0]
    }

    pub fn u_end(&self) -> f64 {
        *self.traj.u.last().unwrap()
    }

    /// `f(u)` by Hermite interpolation; below the grid the horizon value.
    pub fn f_at(&self, u: f64) -> State {
        if u <= self.u_start() {
            return self.f0;
        }
        self.traj.interpolate(u)
    }

    /// `R(u) = f(u) - f₀`.
    pub fn remainder_at(&self, u: f64) -> State {
        let f = self.f_at(u);
        [f[0] - self.f0[0], f[1] - self.f0[1]]
    }

    /// `X(u) = (e^{-iωu} f⁺, e^{iωu} f⁻)`.
    pub fn x_at(&self, u: f64) -> State {
        let f = self.f_at(u);
        let p = C64::from_polar(1.0, -self.omega * u);
        [p * f[0], p.conj() * f[1]]
    }

    /// Largest residual of the Dirac form `X' = [[-iω, V], [conj V, iω]] X`
    /// at the grid nodes, using the stored derivatives.
    pub fn dirac_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (k, &u) in self.traj.u.iter().enumerate() {
            let f = self.traj.y[k];
            let df = self.traj.dy[k];
            let p = C64::from_polar(1.0, -self.omega * u);
            let x = [p * f[0], p.conj() * f[1]];
            let dx = [p * (df[0] - I * self.omega * f[0]), p.conj() * (df[1] + I * self.omega * f[1])];
            let xd = horizon_distance(u, &self.bh).unwrap_or(0.0);
            let r = 2.0 * self.bh.mass + xd;
            let g = (r * xd).sqrt() / (r * r);
            let v = C64::new(-self.lambda, self.m * r) * g;
            let rhs = [-I * self.omega * x[0] + v * x[1], v.conj() * x[0] + I * self.omega * x[1]];
            worst = worst.max((dx[0] - rhs[0]).norm()).max((dx[1] - rhs[1]).norm());
        }
        worst
    }
}

fn norm2(s: &State) -> f64 {
    (s[0].norm_sqr() + s[1].norm_sqr()).sqrt()
}

fn control(tol: f64, bh: &BlackHole) -> StepControl {
    let mut c = StepControl::new(tol);
    c.h_max = 2.0 * bh.mass;
    c.h_init = 0.1 * bh.mass;
    c
}

/// Integrates the amplitude equation forward from `u_start` with `f(u_start) = f_init`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_f_ode(
    omega: f64,
    lambda: f64,
    m: f64,
    bh: &BlackHole,
    u_start: f64,
    u_end: f64,
    f_init: State,
    tol: f64,
) -> Result<RadialSolution> {
    if !(u_start < u_end) || !u_start.is_finite() || !u_end.is_finite() {
        return Err(Error::Domain(format!("need finite u_start < u_end, got {u_start}, {u_end}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let traj = integrate(|u, f| f_rhs(omega, lambda, m, bh, u, f), u_start, u_end, f_init, &control(tol, bh))?;
    Ok(RadialSolution {
        omega,
        lambda,
        m,
        bh: *bh,
        traj,
        f0: f_init,
        tol,
    })
}

/// Constants of the near-horizon estimate `|f(u) - f₀| ≤ c e^{du}` for `u ≤ u₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBound {
    pub c: f64,
    pub d: f64,
    pub u2: f64,
    pub c1: f64,
}

impl AsymptoticBound {
    fn with_rate(m: f64, lambda: f64, mass: f64, u2: f64, f0_abs: f64, d: f64) -> Self {
        let c1 = (2.0 * mass * std::f64::consts::E).powf(-0.5) * (m + lambda.abs() / (2.0 * mass));
        let c = (c1 / d) * f0_abs * ((8.0 * c1 / d) * (d * u2).exp()).exp();
        Self { c, d, u2, c1 }
    }

    /// Closed form with the rate `d = 1/M`, as commonly quoted.
    pub fn stated(m: f64, lambda: f64, mass: f64, u2: f64, f0_abs: f64) -> Self {
        Self::with_rate(m, lambda, mass, u2, f0_abs, 1.0 / mass)
    }

    /// Same construction with the rate `d = 1/(4M)` that follows from
    /// `√(r - 2M) ≤ e^{u/(4M) - 1/2}`.
    pub fn corrected(m: f64, lambda: f64, mass: f64, u2: f64, f0_abs: f64) -> Self {
        Self::with_rate(m, lambda, mass, u2, f0_abs, 0.25 / mass)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.c * (self.d * u).exp()
    }

    pub fn derivative_value(&self, u: f64) -> f64 {
        self.d * self.value(u)
    }
}

/// Worst case of `|R(u)| / (c e^{du})` and `|f'(u)| / (c d e^{du})` over the
/// grid of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub nodes: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub worst_u: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `bound` at every grid node with `u ≤ u₂`, allowing `slack` absolute.
pub fn check_asymptotic_bound(sol: &RadialSolution, bound: &AsymptoticBound, slack: f64) -> BoundCheck {
    let mut out = BoundCheck {
        nodes: 0,
        violations: 0,
        max_ratio: 0.0,
        worst_u: f64::NAN,
    };
    for (k, &u) in sol.traj.u.iter().enumerate() {
        if u > bound.u2 {
            break;
        }
        out.nodes += 1;
        let r = norm2(&sol.remainder_at(u));
        let dr = norm2(&sol.traj.dy[k]);
        let (b, db) = (bound.value(u), bound.derivative_value(u));
        if r > b + slack || dr > db + slack {
            out.violations += 1;
        }
        let ratio = (r / b).max(dr / db);
        if ratio > out.max_ratio {
            out.max_ratio = ratio;
            out.worst_u = u;
        }
    }
    out
}

/// Horizon limit together with the recorded truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonData {
    pub f0: State,
    pub truncation_bound: f64,
}

/// `f₀ = f(u_start)`, with the remainder bound at `u_start`. The bound uses
/// the rate `1/(4M)` and `u₂ = u_start`.
pub fn horizon_data(sol: &RadialSolution) -> Result<HorizonData> {
    let mass = sol.bh.mass;
    let u0 = sol.u_start();
    if u0 > -40.0 * mass {
        return Err(Error::Domain(format!("solution starts at u = {u0}, above -40M")));
    }
    let bound = AsymptoticBound::corrected(sol.m, sol.lambda, mass, u0, norm2(&sol.f0));
    let b = bound.value(u0);
    if b > 1e-8 {
        return Err(Error::WindowTooShort { bound: b, limit: 1e-8 });
    }
    Ok(HorizonData {
        f0: sol.f0,
        truncation_bound: b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Scattering,
    Evanescent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolutions {
    pub x1: RadialSolution,
    pub x2: Option<RadialSolution>,
    pub regime: Regime,
    /// `(u, |X₁(u)|)` before renormalization, for the evanescent regime.
    pub raw_norms: Vec<(f64, f64)>,
}

/// Decaying eigenvector of `[[-iω, V], [conj V, iω]]`, i.e. the one with
/// eigenvalue `-κ`, `κ = √(|V|² - ω²)`.
fn decaying_seed(omega: f64, v: C64) -> State {
    let kappa = (v.norm_sqr() - omega * omega).max(0.0).sqrt();
    let s = [v, I * omega - kappa];
    let n = norm2(&s);
    [s[0] / n, s[1] / n]
}

/// Fundamental solutions at frequency `ω`.
///
/// For `|ω| > m` both solutions start at the horizon with data `(1,0)` and
/// `(0,1)`. For `|ω| < m` the decaying solution is seeded at `u_max`,
/// integrated backward and rescaled to unit norm at the horizon.
pub fn fundamental_solutions(
    omega: f64,
    mode: &AngularMode,
    m: f64,
    bh: &BlackHole,
    cfg: &RadialConfig,
) -> Result<FundamentalSolutions> {
    if (omega.abs() - m).abs() <= 1e-12 {
        return Err(Error::RegimeBoundary { omega, m });
    }
    let mass = bh.mass;
    let u_start = cfg.u_start_over_m * mass;
    let lambda = mode.lambda;
    if omega.abs() > m {
        let u_end = cfg.u_end_over_m * mass;
        let x1 = integrate_f_ode(omega, lambda, m, bh, u_start, u_end, [ONE, ZERO], cfg.tol)?;
        let x2 = integrate_f_ode(omega, lambda, m, bh, u_start, u_end, [ZERO, ONE], cfg.tol)?;
        return Ok(FundamentalSolutions {
            x1,
            x2: Some(x2),
            regime: Regime::Scattering,
            raw_norms: Vec::new(),
        });
    }
    let u_max = cfg.u_max_over_m * mass;
    let x = horizon_distance(u_max, bh)?;
    let r = 2.0 * mass + x;
    let v = C64::new(-lambda, m * r) * ((r * x).sqrt() / (r * r));
    let xs = decaying_seed(omega, v);
    let p = C64::from_polar(1.0, omega * u_max);
    let f_seed = [p * xs[0], p.conj() * xs[1]];
    let back = integrate(|u, f| f_rhs(omega, lambda, m, bh, u, f), u_max, u_start, f_seed, &control(cfg.tol, bh))?;
    let n = back.u.len();
    let scale = 1.0 / norm2(&back.y[n - 1]);
    let raw_norms = back.u.iter().zip(&back.y).map(|(u, y)| (*u, norm2(y))).collect();
    let traj = Trajectory {
        u: back.u.iter().rev().copied().collect(),
        y: back.y.iter().rev().map(|y| [y[0] * scale, y[1] * scale]).collect(),
        dy: back.dy.iter().rev().map(|y| [y[0] * scale, y[1] * scale]).collect(),
    };
    let f0 = traj.y[0];
    Ok(FundamentalSolutions {
        x1: RadialSolution {
            omega,
            lambda,
            m,
            bh: *bh,
            traj,
            f0,
            tol: cfg.tol,
        },
        x2: None,
        regime: Regime::Evanescent,
        raw_norms,
    })
}

/// Horizon data `f₀` of the decaying solution for `|ω| < m`.
pub fn evanescent_horizon_data(omega: f64, mode: &AngularMode, m: f64, bh: &BlackHole, cfg: &RadialConfig) -> Result<State> {
    let s = fundamental_solutions(omega, mode, m, bh, cfg)?;
    if s.regime != Regime::Evanescent {
        return Err(Error::Domain(format!("|ω| = {} is not below m = {m}", omega.abs())));
    }
    Ok(s.x1.f0)
}

/// How the free off-diagonal coefficient `t₁₂` is chosen for `|ω| > m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum T12Strategy {
    Zero,
    Constant { re: f64, im: f64 },
    /// Value obtained from [`fit_t12_completeness`].
    CompletenessFit { re: f64, im: f64 },
}

impl T12Strategy {
    pub fn value(&self) -> C64 {
        match *self {
            T12Strategy::Zero => ZERO,
            T12Strategy::Constant { re, im } | T12Strategy::CompletenessFit { re, im } => C64::new(re, im),
        }
    }

    pub fn constant(v: C64) -> Self {
        T12Strategy::Constant { re: v.re, im: v.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionMatrix {
    pub omega: f64,
    pub t11: C64,
    pub t12: C64,
    pub t21: C64,
    pub t22: C64,
}

impl TransmissionMatrix {
    pub fn get(&self, a: usize, b: usize) -> C64 {
        match (a, b) {
            (0, 0) => self.t11,
            (0, 1) => self.t12,
            (1, 0) => self.t21,
            _ => self.t22,
        }
    }
}

/// Weights of the spectral representation at frequency `ω`.
pub fn transmission_coefficients(omega: f64, m: f64, strategy: &T12Strategy) -> Result<TransmissionMatrix> {
    if omega.abs() <= m {
        return Ok(TransmissionMatrix {
            omega,
            t11: ONE,
            t12: ZERO,
            t21: ZERO,
            t22: ZERO,
        });
    }
    let t12 = strategy.value();
    if t12.norm() > 0.5 + 1e-15 {
        return Err(Error::ConstraintViolation(format!("|t12| = {} exceeds 1/2", t12.norm())));
    }
    Ok(TransmissionMatrix {
        omega,
        t11: C64::new(0.5, 0.0),
        t12,
        t21: t12.conj(),
        t22: C64::new(0.5, 0.0),
    })
}

/// Two-component data sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeData {
    pub grid: Vec<f64>,
    pub values: Vec<State>,
}

impl ModeData {
    fn spacing(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }

    pub fn l2_norm(&self) -> f64 {
        let h = self.spacing();
        (self.values.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum::<f64>() * h).sqrt()
    }

    pub fn l2_distance(&self, other: &ModeData) -> f64 {
        let h = self.spacing();
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr())
            .sum();
        (s * h).sqrt()
    }

    fn zeros_like(&self) -> ModeData {
        ModeData {
            grid: self.grid.clone(),
            values: vec![[ZERO, ZERO]; self.grid.len()],
        }
    }
}

/// ω-quadrature for the integral representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaQuadrature {
    pub omega_max: f64,
    pub panel_width: f64,
    pub order: usize,
    /// Maximum number of ω nodes.
    pub budget: usize,
}

impl Default for OmegaQuadrature {
    fn default() -> Self {
        Self {
            omega_max: 12.0,
            panel_width: 0.05,
            order: 8,
            budget: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub data: ModeData,
    /// Spectral mass of the initial data beyond `omega_max`, relative to its norm.
    pub tail_estimate: f64,
    pub omega_nodes: usize,
}

/// Per-frequency pieces of the representation, split by their dependence on t₁₂.
struct Pieces {
    base: ModeData,
    coef_t12: ModeData,
    coef_t21: ModeData,
}

fn omega_nodes(m: f64, q: &OmegaQuadrature) -> Result<Vec<(f64, f64)>> {
    let mut nodes = Vec::new();
    let segments = [(-q.omega_max, -m), (-m, m), (m, q.omega_max)];
    for (a, b) in segments {
        if b > a {
            let (x, w) = gl_panels_max_width(a, b, q.panel_width, q.order);
            nodes.extend(x.into_iter().zip(w));
        }
    }
    if nodes.len() > q.budget {
        return Err(Error::QuadratureBudgetExceeded(format!(
            "{} ω nodes requested, budget {}",
            nodes.len(),
            q.budget
        )));
    }
    Ok(nodes)
}

fn inner(x: &[State], data: &ModeData, h: f64) -> C64 {
    x.iter()
        .zip(&data.values)
        .map(|(a, b)| a[0].conj() * b[0] + a[1].conj() * b[1])
        .sum::<C64>()
        * h
}

#[allow(clippy::too_many_arguments)]
fn representation_pieces(
    x0: &ModeData,
    t: f64,
    mode: &AngularMode,
    m: f64,
    bh: &BlackHole,
    q: &OmegaQuadrature,
    cfg: &RadialConfig,
) -> Result<(Pieces, usize)> {
    let nodes = omega_nodes(m, q)?;
    let h = x0.spacing();
    let mut p = Pieces {
        base: x0.zeros_like(),
        coef_t12: x0.zeros_like(),
        coef_t21: x0.zeros_like(),
    };
    let u_hi = *x0.grid.last().unwrap();
    let mut local = *cfg;
    local.u_end_over_m = local.u_end_over_m.max(u_hi / bh.mass + 1.0);
    for &(omega, w) in &nodes {
        let fs = fundamental_solutions(omega, mode, m, bh, &local)?;
        let xa: Vec<State> = x0.grid.iter().map(|&u| fs.x1.x_at(u)).collect();
        let phase = C64::from_polar(w / std::f64::consts::PI, -omega * t);
        let c1 = inner(&xa, x0, h) * phase;
        match fs.x2 {
            None => {
                for (acc, x) in p.base.values.iter_mut().zip(&xa) {
                    acc[0] += x[0] * c1;
                    acc[1] += x[1] * c1;
                }
            }
            Some(x2) => {
                let xb: Vec<State> = x0.grid.iter().map(|&u| x2.x_at(u)).collect();
                let c2 = inner(&xb, x0, h) * phase;
                for k in 0..xa.len() {
                    for c in 0..2 {
                        p.base.values[k][c] += (xa[k][c] * c1 + xb[k][c] * c2) * 0.5;
                        p.coef_t12.values[k][c] += xa[k][c] * c2;
                        p.coef_t21.values[k][c] += xb[k][c] * c1;
                    }
                }
            }
        }
    }
    Ok((p, nodes.len()))
}

fn spectral_tail(x0: &ModeData, omega_max: f64) -> f64 {
    // plane-wave transform of the data, sampled beyond omega_max
    let h = x0.spacing();
    let total = x0.l2_norm().powi(2);
    if total == 0.0 {
        return 0.0;
    }
    let kmax = std::f64::consts::PI / h;
    if omega_max >= kmax {
        return 0.0;
    }
    let n = 2000;
    let dk = (kmax - omega_max) / n as f64;
    let mut tail = 0.0;
    for j in 0..n {
        let k = omega_max + (j as f64 + 0.5) * dk;
        for s in [-1.0, 1.0] {
            let mut a = [ZERO, ZERO];
            for (u, v) in x0.grid.iter().zip(&x0.values) {
                let e = C64::from_polar(h, s * k * u);
                a[0] += v[0] * e;
                a[1] += v[1] * e;
            }
            tail += (a[0].norm_sqr() + a[1].norm_sqr()) * dk / (2.0 * std::f64::consts::PI);
        }
    }
    (tail / total).sqrt()
}

/// Evolves compactly supported data by the ω-quadrature of the integral
/// representation `(1/π) ∫ dω e^{-iωt} Σ t_ab X_a ⟨X_b, X₀⟩`.
#[allow(clippy::too_many_arguments)]
pub fn propagate_mode(
    x0: &ModeData,
    t: f64,
    mode: &AngularMode,
    m: f64,
    bh: &BlackHole,
    q: &OmegaQuadrature,
    strategy: &T12Strategy,
    cfg: &RadialConfig,
) -> Result<PropagationResult> {
    if x0.grid.len() < 3 {
        return Err(Error::Domain("initial data needs at least three grid points".into()));
    }
    let t12 = transmission_coefficients(m + 1.0, m, strategy)?.t12;
    let (p, count) = representation_pieces(x0, t, mode, m, bh, q, cfg)?;
    let mut out = p.base;
    for k in 0..out.values.len() {
        for c in 0..2 {
            out.values[k][c] += p.coef_t12.values[k][c] * t12 + p.coef_t21.values[k][c] * t12.conj();
        }
    }
    Ok(PropagationResult {
        data: out,
        tail_estimate: spectral_tail(x0, q.omega_max),
        omega_nodes: count,
    })
}

/// Least-squares choice of a constant `t₁₂` on the disk `|t₁₂| ≤ 1/2` that
/// minimizes the `t = 0` reconstruction residual of `x0`.
pub fn fit_t12_completeness(
    x0: &ModeData,
    mode: &AngularMode,
    m: f64,
    bh: &BlackHole,
    q: &OmegaQuadrature,
    cfg: &RadialConfig,
) -> Result<(C64, f64)> {
    let (p, _) = representation_pieces(x0, 0.0, mode, m, bh, q, cfg)?;
    // residual(t) = r0 + x·P + y·Q with t = x + iy
    let n = x0.values.len();
    let mut r0 = Vec::with_capacity(2 * n);
    let mut pv = Vec::with_capacity(2 * n);
    let mut qv = Vec::with_capacity(2 * n);
    for k in 0..n {
        for c in 0..2 {
            r0.push(p.base.values[k][c] - x0.values[k][c]);
            pv.push(p.coef_t12.values[k][c] + p.coef_t21.values[k][c]);
            qv.push(I * (p.coef_t12.values[k][c] - p.coef_t21.values[k][c]));
        }
    }
    let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
    let (app, apq, aqq) = (dot(&pv, &pv), dot(&pv, &qv), dot(&qv, &qv));
    let (bp, bq) = (-dot(&pv, &r0), -dot(&qv, &r0));
    let det = app * aqq - apq * apq;
    let mut t = if det.abs() > 1e-300 {
        C64::new((bp * aqq - bq * apq) / det, (app * bq - apq * bp) / det)
    } else {
        ZERO
    };
    if t.norm() > 0.5 {
        t *= 0.5 / t.norm();
    }
    let res: f64 = (0..r0.len())
        .map(|i| (r0[i] + pv[i] * t.re + qv[i] * t.im).norm_sqr())
        .sum::<f64>()
        * x0.spacing();
    Ok((t, res.sqrt()))
}
