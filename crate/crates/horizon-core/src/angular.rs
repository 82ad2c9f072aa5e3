//! Eigenvalues of the angular Dirac operator on the sphere.
//!
//! With `a = k + 1/2` and the substitution `x = cos ϑ`, the two spinor
//! components are written as Jacobi weights times polynomials `p₁`, `p₂`. The
//! off-diagonal blocks then act on polynomials as
//! `p₂ ↦ -(1-x) p₂' + (|a|+1/2) p₂` and `p₁ ↦ (1+x) p₁' + (|a|+1/2) p₁`.
//! Each component is collocated on the Gauss–Jacobi nodes of its own weight and
//! the blocks are symmetrized with the square roots of the quadrature weights.

use crate::error::{Error, Result};
use crate::quadrature::gauss_jacobi;
use crate::spectral::init_backend;
use faer::Mat;
use serde::{Deserialize, Serialize};

/// A single angular mode and its eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMode {
    pub k: f64,
    pub n: usize,
    pub lambda: f64,
}

impl AngularMode {
    /// Binds `lambda` to the `n`-th positive eigenvalue (`n ≥ 1`).
    pub fn compute(k: f64, n: usize, grid: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("mode index n starts at 1".into()));
        }
        let ev = angular_eigenvalues(k, grid)?;
        let lambda = ev
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .nth(n - 1)
            .ok_or_else(|| Error::Domain(format!("grid {grid} too small for mode n = {n}")))?;
        Ok(Self { k, n, lambda })
    }

    /// Uses a known eigenvalue instead of computing one.
    pub fn with_lambda(k: f64, n: usize, lambda: f64) -> Self {
        Self { k, n, lambda }
    }
}

fn half_integer_shift(k: f64) -> Result<f64> {
    let a = k + 0.5;
    if !k.is_finite() || (a - a.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!("k = {k} is not a half-integer")));
    }
    Ok(a.round())
}

/// Barycentric weights for Gauss–Jacobi nodes: `(-1)^j √((1 - x_j²) w_j)`.
fn barycentric_weights(x: &[f64], w: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(w)
        .enumerate()
        .map(|(j, (x, w))| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * ((1.0 - x * x) * w).sqrt()
        })
        .collect()
}

/// Rows `(ℓ_k(y), ℓ_k'(y))` of the interpolation and differentiation maps
/// from values on `x` to the point `y`, which must not coincide with a node.
fn interp_rows(x: &[f64], v: &[f64], y: f64) -> (Vec<f64>, Vec<f64>) {
    let c: Vec<f64> = x.iter().zip(v).map(|(x, v)| v / (y - x)).collect();
    let s: f64 = c.iter().sum();
    let l: Vec<f64> = c.iter().map(|c| c / s).collect();
    let big_s: f64 = l.iter().zip(x).map(|(l, x)| l / (y - x)).sum();
    let d = l.iter().zip(x).map(|(l, x)| l * big_s - l / (y - x)).collect();
    (l, d)
}

/// The `2N × 2N` symmetrized discretization `[[0, Bᵀ], [B, 0]]`, where `B` is
/// the average of the independently assembled lower block and the transposed
/// upper block. Their raw mismatch is [`angular_symmetry_defect`].
pub fn assemble_angular_operator(k: f64, n: usize) -> Result<Mat<f64>> {
    let b = averaged_block(k, n)?;
    let mut m = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(i, n + j)] = b[(j, i)];
            m[(n + i, j)] = b[(i, j)];
        }
    }
    Ok(m)
}

fn averaged_block(k: f64, n: usize) -> Result<Mat<f64>> {
    let (top, bottom) = angular_blocks(k, n)?;
    Ok(Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (bottom[(i, j)] + top[(j, i)])))
}

fn angular_blocks(k: f64, n: usize) -> Result<(Mat<f64>, Mat<f64>)> {
    if n < 2 {
        return Err(Error::Domain("angular grid needs at least two nodes".into()));
    }
    let a = half_integer_shift(k)?.abs();
    let c = a + 0.5;
    // component 1 carries (1-x)^{a-1/2}(1+x)^{a+1/2}, component 2 the mirror
    let (x1, w1) = gauss_jacobi(n, a - 0.5, a + 0.5)?;
    let (x2, w2) = gauss_jacobi(n, a + 0.5, a - 0.5)?;
    let v1 = barycentric_weights(&x1, &w1);
    let v2 = barycentric_weights(&x2, &w2);
    let s1: Vec<f64> = w1.iter().map(|w| w.sqrt()).collect();
    let s2: Vec<f64> = w2.iter().map(|w| w.sqrt()).collect();
    // bottom: values of p₁ on x1 -> (1+x) p₁' + c p₁ on x2
    let mut bottom = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let (l, d) = interp_rows(&x1, &v1, x2[i]);
        for j in 0..n {
            bottom[(i, j)] = s2[i] * ((1.0 + x2[i]) * d[j] + c * l[j]) / s1[j];
        }
    }
    // top: values of p₂ on x2 -> -(1-x) p₂' + c p₂ on x1
    let mut top = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let (l, d) = interp_rows(&x2, &v2, x1[i]);
        for j in 0..n {
            top[(i, j)] = s1[i] * (-(1.0 - x1[i]) * d[j] + c * l[j]) / s2[j];
        }
    }
    Ok((top, bottom))
}

/// Largest `|T - Bᵀ|` relative to the largest block entry.
pub fn angular_symmetry_defect(k: f64, n: usize) -> Result<f64> {
    let (top, bottom) = angular_blocks(k, n)?;
    let mut dev = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((top[(i, j)] - bottom[(j, i)]).abs());
            scale = scale.max(top[(i, j)].abs());
        }
    }
    Ok(dev / scale)
}

/// Spectrum of the symmetrized operator, sorted by `|λ|` and then by sign.
///
/// The spectrum of `[[0, Bᵀ], [B, 0]]` is `±` the singular values of `B`.
pub fn angular_eigenvalues(k: f64, n: usize) -> Result<Vec<f64>> {
    let b = averaged_block(k, n)?;
    init_backend();
    let s = b
        .singular_values()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let mut out = Vec::with_capacity(2 * n);
    for v in s.iter().rev() {
        out.push(-v);
        out.push(*v);
    }
    Ok(out)
}
