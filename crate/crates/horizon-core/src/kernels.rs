//! Kernel families: the limiting kernels, their η-transforms, and the full
//! regularized projection kernel of a single angular mode.

use crate::angular::AngularMode;
use crate::entropy::eta;
use crate::error::{Error, Result};
use crate::geometry::BlackHole;
use crate::opalpha::Interval;
use crate::quadrature::{adaptive_gl, gl_panels, gl_panels_max_width, QuadratureConfig};
use crate::radial::{
    fundamental_solutions, transmission_coefficients, RadialConfig, RadialSolution, State, T12Strategy,
    TransmissionMatrix,
};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub type Block = [[C64; 2]; 2];

/// `(α/2π) / (M ∓ iα(u-u'))`, the kernel of the symbols `e^{±Mξ}` on `∓ξ > 0`.
pub fn limiting_kernel(which: u8, mass: f64, alpha: f64, u: f64, up: f64) -> C64 {
    let k = C64::new(alpha / (2.0 * PI), 0.0) / C64::new(mass, -alpha * (u - up));
    if which == 2 {
        k.conj()
    } else {
        k
    }
}

fn zeta_minus_one(s: usize) -> f64 {
    // Euler–Maclaurin tail after J terms
    let j = 50.0_f64;
    let sf = s as f64;
    let mut acc = 0.0;
    for n in 2..50 {
        acc += (n as f64).powf(-sf);
    }
    acc + j.powf(1.0 - sf) / (sf - 1.0) + 0.5 * j.powf(-sf) + sf * j.powf(-sf - 1.0) / 12.0
        - sf * (sf + 1.0) * (sf + 2.0) * j.powf(-sf - 3.0) / 720.0
        + sf * (sf + 1.0) * (sf + 2.0) * (sf + 3.0) * (sf + 4.0) * j.powf(-sf - 5.0) / 30240.0
}

/// Complex digamma function for `Re z > 0`.
pub fn digamma(mut z: C64) -> C64 {
    let mut acc = ZERO;
    while z.norm() < 12.0 {
        acc -= z.inv();
        z += 1.0;
    }
    let zi = z.inv();
    let z2 = zi * zi;
    let series = z2
        * (C64::new(-1.0 / 12.0, 0.0)
            + z2 * (C64::new(1.0 / 120.0, 0.0)
                + z2 * (C64::new(-1.0 / 252.0, 0.0)
                    + z2 * (C64::new(1.0 / 240.0, 0.0)
                        + z2 * (C64::new(-1.0 / 132.0, 0.0) + z2 * C64::new(691.0 / 32760.0, 0.0))))));
    acc + z.ln() - zi * 0.5 + series
}

/// `∫₀¹ η(s) s^{w-1} ds = 1/(w+1)² + (ψ(w+2) - ψ(2)) / (w(w+1))`.
pub fn eta_mellin(w: C64) -> C64 {
    let ratio = if w.norm() < 0.5 {
        // (ψ(2+w) - ψ(2))/w = Σ_{n≥1} (-1)^{n+1} (ζ(n+1) - 1) w^{n-1}
        let mut sum = ZERO;
        let mut p = C64::new(1.0, 0.0);
        for n in 1..60 {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum += p * (sign * zeta_minus_one(n + 1));
            p *= w;
            if p.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (digamma(w + 2.0) - digamma(C64::new(2.0, 0.0))) / w
    };
    (w + 1.0).powi(-2) + ratio / (w + 1.0)
}

/// Closed form of the η-transformed limiting kernel,
/// `(α/(2πM)) ∫₀¹ η(s) s^{w-1} ds` with `w = -iα(u-u')/M`.
pub fn eta_limiting_kernel_closed(which: u8, mass: f64, alpha: f64, u: f64, up: f64) -> C64 {
    let w = C64::new(0.0, -alpha * (u - up) / mass);
    let k = eta_mellin(w) * (alpha / (2.0 * PI * mass));
    if which == 2 {
        k.conj()
    } else {
        k
    }
}

/// `(α/2π) ∫_{-∞}^0 η(e^{Mξ}) e^{-iαξ(u-u')} dξ` (which = 1) by adaptive
/// quadrature on panels short enough to resolve the oscillation. The half
/// line is cut where `η(e^{Mξ}) < 1e-18`.
pub fn eta_limiting_kernel(which: u8, mass: f64, alpha: f64, u: f64, up: f64, quad: &QuadratureConfig) -> Result<C64> {
    let freq = alpha * (u - up);
    let xi_min = -46.0 / mass;
    let width = (1.0 / mass).min(if freq != 0.0 { PI / freq.abs() } else { f64::INFINITY });
    let panels = ((-xi_min) / width).ceil() as usize;
    if panels > 2_000_000 {
        return Err(Error::QuadratureBudgetExceeded(format!("{panels} panels for α(u-u') = {freq}")));
    }
    let h = -xi_min / panels as f64;
    let cfg = QuadratureConfig {
        abs_tol: quad.abs_tol / panels as f64,
        ..*quad
    };
    let mut re = 0.0;
    let mut im = 0.0;
    for p in 0..panels {
        let a = xi_min + p as f64 * h;
        let b = a + h;
        let g = |xi: f64| eta((mass * xi).exp());
        re += adaptive_gl(|xi| g(xi) * (freq * xi).cos(), a, b, &cfg)?;
        im += adaptive_gl(|xi| -g(xi) * (freq * xi).sin(), a, b, &cfg)?;
    }
    let k = C64::new(re, im) * (alpha / (2.0 * PI));
    Ok(if which == 2 { k.conj() } else { k })
}

/// `∫_{ω_min}^0 η(e^{εω}) dω`; the full half line when `omega_min` is `None`.
pub fn eta_weight_integral(eps: f64, omega_min: Option<f64>, quad: &QuadratureConfig) -> Result<f64> {
    // substitution s = e^{εω}: (1/ε) ∫_{s_min}^1 η(s)/s ds
    let s_min = omega_min.map(|w| (eps * w).exp()).unwrap_or(0.0);
    let f = |s: f64| if s <= 0.0 { 0.0 } else { eta(s) / s };
    // split at 1/2 so that both endpoint behaviours are isolated
    let a = if s_min < 0.5 { adaptive_gl(f, s_min, 0.5, quad)? } else { 0.0 };
    let b = adaptive_gl(f, s_min.max(0.5), 1.0, quad)?;
    Ok((a + b) / eps)
}

/// Spectral weight applied to the frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weight {
    /// `e^{εω}`
    Exp,
    /// `η(e^{εω})`
    Eta,
}

impl Weight {
    pub fn at(&self, eps: f64, omega: f64) -> f64 {
        let g = (eps * omega).exp();
        match self {
            Weight::Exp => g,
            Weight::Eta => eta(g),
        }
    }

    /// `(1/2π) ∫_{-∞}^0 g(ω) e^{-iωx} dω` in closed form.
    pub fn half_line_transform(&self, eps: f64, x: f64) -> C64 {
        match self {
            Weight::Exp => C64::new(1.0 / (2.0 * PI), 0.0) / C64::new(eps, -x),
            Weight::Eta => eta_mellin(C64::new(0.0, -x / eps)) / (2.0 * PI * eps),
        }
    }
}

/// The kernel families handled by the Nyström layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolKind {
    Full,
    Limiting1,
    Limiting2,
    LimitingMatrix,
    EtaLimiting1,
    EtaLimiting2,
    EtaFull,
    ProjectionWindow,
}

/// A scalar translation-invariant kernel family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolDescriptor {
    pub kind: SymbolKind,
    pub mass: f64,
    pub alpha: f64,
    /// Frequency window `(j1, j2)` for [`SymbolKind::ProjectionWindow`].
    pub window: (f64, f64),
}

impl SymbolDescriptor {
    pub fn limiting(which: u8, mass: f64, alpha: f64) -> Self {
        let kind = if which == 2 { SymbolKind::Limiting2 } else { SymbolKind::Limiting1 };
        Self {
            kind,
            mass,
            alpha,
            window: (0.0, 0.0),
        }
    }

    pub fn eta_limiting(which: u8, mass: f64, alpha: f64) -> Self {
        let kind = if which == 2 { SymbolKind::EtaLimiting2 } else { SymbolKind::EtaLimiting1 };
        Self {
            kind,
            mass,
            alpha,
            window: (0.0, 0.0),
        }
    }

    pub fn projection_window(j1: f64, j2: f64, alpha: f64) -> Self {
        Self {
            kind: SymbolKind::ProjectionWindow,
            mass: 1.0,
            alpha,
            window: (j1, j2),
        }
    }

    pub fn id(&self) -> String {
        let base = match self.kind {
            SymbolKind::Full => "full",
            SymbolKind::Limiting1 => "limiting-1",
            SymbolKind::Limiting2 => "limiting-2",
            SymbolKind::LimitingMatrix => "limiting-matrix",
            SymbolKind::EtaLimiting1 => "eta-limiting-1",
            SymbolKind::EtaLimiting2 => "eta-limiting-2",
            SymbolKind::EtaFull => "eta-full",
            SymbolKind::ProjectionWindow => "projection-window",
        };
        format!("{base}:M={}:alpha={}", self.mass, self.alpha)
    }

    /// Scalar kernel value. The η kernels use the closed form.
    pub fn eval(&self, u: f64, up: f64) -> Result<C64> {
        let (m, a) = (self.mass, self.alpha);
        Ok(match self.kind {
            SymbolKind::Limiting1 => limiting_kernel(1, m, a, u, up),
            SymbolKind::Limiting2 => limiting_kernel(2, m, a, u, up),
            SymbolKind::EtaLimiting1 => eta_limiting_kernel_closed(1, m, a, u, up),
            SymbolKind::EtaLimiting2 => eta_limiting_kernel_closed(2, m, a, u, up),
            SymbolKind::ProjectionWindow => crate::opalpha::projection_window_kernel(self.window, a, u, up),
            other => {
                return Err(Error::Domain(format!("{other:?} is not a scalar kernel")));
            }
        })
    }

    /// The symbol `a(ξ)` itself.
    pub fn symbol(&self, xi: f64) -> f64 {
        let m = self.mass;
        match self.kind {
            SymbolKind::Limiting1 => {
                if xi < 0.0 {
                    (m * xi).exp()
                } else {
                    0.0
                }
            }
            SymbolKind::Limiting2 => {
                if xi > 0.0 {
                    (-m * xi).exp()
                } else {
                    0.0
                }
            }
            SymbolKind::EtaLimiting1 => {
                if xi < 0.0 {
                    eta((m * xi).exp())
                } else {
                    0.0
                }
            }
            SymbolKind::EtaLimiting2 => {
                if xi > 0.0 {
                    eta((-m * xi).exp())
                } else {
                    0.0
                }
            }
            SymbolKind::ProjectionWindow => {
                if xi > self.window.0 && xi < self.window.1 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => f64::NAN,
        }
    }
}

/// Horizon data of the decaying solution `X₁` at `ω` and at `-ω`, as needed
/// by the entries `ã_ij(ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonSamples {
    pub f0_at_omega: Option<State>,
    pub f0_at_minus_omega: Option<State>,
    pub t12_at_minus_omega: C64,
    pub t21_at_omega: C64,
}

/// The four entries `ã_ij(ω)` of the near-horizon symbol, without the phase
/// `e^{2iωu}` that multiplies the off-diagonal ones.
///
/// The entries for the second spinor component are written after the change
/// of variable `ω → -ω`, so `ã₁₂` and `ã₂₂` live on `ω > 0`.
pub fn atilde_entries(omega: f64, data: &HorizonSamples, m: f64, eps: f64) -> Result<Block> {
    let gp = (eps * omega).exp();
    let gm = (-eps * omega).exp();
    let need = |f: Option<State>, which: &str| {
        f.ok_or_else(|| Error::MissingSolution(format!("horizon data at {which} for ω = {omega}")))
    };
    let mut a = [[ZERO; 2]; 2];
    if omega < -m {
        a[0][0] = C64::new(0.5 * gp, 0.0);
        a[1][0] = data.t21_at_omega * gp;
    } else if omega < 0.0 {
        let f = need(data.f0_at_omega, "ω")?;
        a[0][0] = C64::new(gp * f[0].norm_sqr(), 0.0);
        a[1][0] = f[1] * f[0].conj() * gp;
    } else if omega < m {
        let f = need(data.f0_at_minus_omega, "-ω")?;
        a[0][1] = f[1].conj() * f[0] * gm;
        a[1][1] = C64::new(gm * f[1].norm_sqr(), 0.0);
    } else {
        a[0][1] = data.t12_at_minus_omega * gm;
        a[1][1] = C64::new(0.5 * gm, 0.0);
    }
    Ok(a)
}

/// Settings for the full kernel evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullKernelSpec {
    pub m: f64,
    pub eps: f64,
    pub t12: T12Strategy,
    pub weight: Weight,
    /// Gauss–Legendre nodes on the evanescent band `(-m, 0)`.
    pub band_nodes: usize,
    /// Frequencies below `-omega_r` are treated as plane waves in the
    /// remainder integral.
    pub omega_r: f64,
    pub r_order: usize,
    pub radial: RadialConfig,
}

impl FullKernelSpec {
    pub fn new(m: f64, eps: f64) -> Self {
        Self {
            m,
            eps,
            t12: T12Strategy::Zero,
            weight: Weight::Exp,
            band_nodes: 48,
            omega_r: 1.0,
            r_order: 8,
            radial: RadialConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
struct BandNode {
    omega: f64,
    w: f64,
    sol: RadialSolution,
}

#[derive(Debug, Clone)]
struct ScatterNode {
    omega: f64,
    w: f64,
    x1: RadialSolution,
    x2: RadialSolution,
    t: TransmissionMatrix,
}

/// Kernel of the regularized negative-frequency projection of one mode,
/// `(1/π) ∫_{-∞}^0 g(ω) Σ t_ab X_a(u,ω) X_b(u',ω)† dω`, split into the
/// plane-wave part built from horizon data and the remainder carried by
/// `R = f - f₀`.
#[derive(Debug, Clone)]
pub struct FullKernel {
    pub spec: FullKernelSpec,
    pub mode: AngularMode,
    pub bh: BlackHole,
    band: Vec<BandNode>,
    scatter: Vec<ScatterNode>,
}

/// Builds the evaluator, solving the radial problem once per ω node. The
/// region fixes the resolution of the remainder quadrature.
pub fn assemble_full_kernel(mode: &AngularMode, bh: &BlackHole, spec: &FullKernelSpec, region: &Interval) -> Result<FullKernel> {
    if !(spec.eps > 0.0) {
        return Err(Error::Domain("ε must be positive".into()));
    }
    let m = spec.m;
    let mut radial = spec.radial;
    radial.u_end_over_m = radial.u_end_over_m.max(region.u0 / bh.mass + 1.0);
    let mut band = Vec::new();
    if m > 0.0 {
        let (x, w) = gl_panels(-m, 0.0, 1, spec.band_nodes);
        for (omega, w) in x.into_iter().zip(w) {
            let fs = fundamental_solutions(omega, mode, m, bh, &radial)?;
            band.push(BandNode { omega, w, sol: fs.x1 });
        }
    }
    let s_max = 2.0 * region.u0.abs().max((region.u0 - region.rho).abs());
    let width = PI / (2.0 * s_max.max(region.rho));
    let mut scatter = Vec::new();
    if spec.omega_r > m {
        let (x, w) = gl_panels_max_width(-spec.omega_r, -m, width, spec.r_order);
        for (omega, w) in x.into_iter().zip(w) {
            let fs = fundamental_solutions(omega, mode, m, bh, &radial)?;
            let x2 = fs
                .x2
                .ok_or_else(|| Error::MissingSolution(format!("second solution at ω = {omega}")))?;
            let t = transmission_coefficients(omega, m, &spec.t12)?;
            scatter.push(ScatterNode { omega, w, x1: fs.x1, x2, t });
        }
    }
    Ok(FullKernel {
        spec: *spec,
        mode: *mode,
        bh: *bh,
        band,
        scatter,
    })
}

/// The same construction with weight `η(e^{εω})`.
pub fn eta_full_kernel(mode: &AngularMode, bh: &BlackHole, spec: &FullKernelSpec, region: &Interval) -> Result<FullKernel> {
    let mut s = *spec;
    s.weight = Weight::Eta;
    assemble_full_kernel(mode, bh, &s, region)
}

fn plane_x(omega: f64, f0: &State, u: f64) -> State {
    let p = C64::from_polar(1.0, -omega * u);
    [p * f0[0], p.conj() * f0[1]]
}

fn add_outer(acc: &mut Block, x: &State, y: &State, c: C64) {
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += x[i] * y[j].conj() * c;
        }
    }
}

impl FullKernel {
    fn t12(&self) -> C64 {
        self.spec.t12.value()
    }

    /// Horizon data of the decaying solution at the band nodes.
    pub fn band_data(&self) -> Vec<(f64, f64, State)> {
        self.band.iter().map(|b| (b.omega, b.w, b.sol.f0)).collect()
    }

    /// Plane-wave part, from closed-form half-line transforms corrected on
    /// the evanescent band.
    pub fn plane(&self, u: f64, up: f64) -> Block {
        let (eps, wt) = (self.spec.eps, self.spec.weight);
        let delta = u - up;
        let s = u + up;
        let t12 = self.t12();
        let h_d = wt.half_line_transform(eps, delta);
        let h_s = wt.half_line_transform(eps, s);
        let mut k = [[h_d, t12 * h_s * 2.0], [t12.conj() * h_s.conj() * 2.0, h_d.conj()]];
        for b in &self.band {
            let g = wt.at(eps, b.omega) * b.w / PI;
            let f = b.sol.f0;
            let pd = C64::from_polar(1.0, -b.omega * delta);
            let ps = C64::from_polar(1.0, -b.omega * s);
            k[0][0] -= pd * ((0.5 - f[0].norm_sqr()) * g);
            k[1][1] -= pd.conj() * ((0.5 - f[1].norm_sqr()) * g);
            let c = t12 - f[0] * f[1].conj();
            k[0][1] -= ps * c * g;
            k[1][0] -= ps.conj() * c.conj() * g;
        }
        k
    }

    /// Remainder part carried by `R = f - f₀`, over `-omega_r < ω < 0`.
    pub fn remainder(&self, u: f64, up: f64) -> Block {
        let (eps, wt) = (self.spec.eps, self.spec.weight);
        let mut k = [[ZERO; 2]; 2];
        for b in &self.band {
            let g = C64::new(wt.at(eps, b.omega) * b.w / PI, 0.0);
            let (x, xp) = (b.sol.x_at(u), b.sol.x_at(up));
            let (x0, xp0) = (plane_x(b.omega, &b.sol.f0, u), plane_x(b.omega, &b.sol.f0, up));
            add_outer(&mut k, &x, &xp, g);
            add_outer(&mut k, &x0, &xp0, -g);
        }
        for n in &self.scatter {
            let g = wt.at(eps, n.omega) * n.w / PI;
            let sols = [&n.x1, &n.x2];
            for a in 0..2 {
                for bidx in 0..2 {
                    let c = n.t.get(a, bidx) * g;
                    if c == ZERO {
                        continue;
                    }
                    let (sa, sb) = (sols[a], sols[bidx]);
                    add_outer(&mut k, &sa.x_at(u), &sb.x_at(up), c);
                    add_outer(&mut k, &plane_x(n.omega, &sa.f0, u), &plane_x(n.omega, &sb.f0, up), -c);
                }
            }
        }
        k
    }

    pub fn eval(&self, u: f64, up: f64) -> Block {
        let p = self.plane(u, up);
        let r = self.remainder(u, up);
        [[p[0][0] + r[0][0], p[0][1] + r[0][1]], [p[1][0] + r[1][0], p[1][1] + r[1][1]]]
    }

    /// Bound on the remainder contribution from `ω < -omega_r`, using the
    /// near-horizon estimate with rate `1/(4M)` at `u_max`.
    pub fn remainder_tail_bound(&self, u_max: f64) -> f64 {
        let bd = crate::radial::AsymptoticBound::corrected(self.spec.m, self.mode.lambda, self.bh.mass, u_max, 1.0);
        let r = bd.value(u_max);
        let tail = (-self.spec.eps * self.spec.omega_r).exp() / self.spec.eps;
        (2.0 * r + r * r) * tail / PI
    }
}

/// Remainder block `r_ij(u, u')` of the full kernel.
pub fn error_kernel_r(kernel: &FullKernel, u: f64, up: f64) -> Block {
    kernel.remainder(u, up)
}
