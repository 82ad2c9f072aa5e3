//! Dense Hermitian spectra, Schatten norms, trace functionals and the
//! entropic difference.

use crate::entropy::SpectralFunction;
use crate::error::{Error, Result};
use crate::opalpha::{DiscretizedOperator, Interval};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Real eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub dimension: usize,
}

impl Spectrum {
    fn from_ascending(mut v: Vec<f64>) -> Self {
        v.reverse();
        let dimension = v.len();
        Self { eigenvalues: v, dimension }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub q: f64,
    pub value: f64,
    pub singular_values: Vec<f64>,
}

impl SchattenReport {
    /// `Σ s_k^q`.
    pub fn q_power(&self) -> f64 {
        self.value.powf(self.q)
    }
}

/// Outcome of `tr f(χAχ) - tr χ f(A) χ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropicDifferenceResult {
    pub alpha: f64,
    pub region: Interval,
    pub trace_restricted: f64,
    pub trace_masked: f64,
    pub d_value: f64,
    pub kernel_id: String,
}

pub(crate) fn init_backend() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Largest `|A_ij - conj(A_ji)|`.
pub fn hermitian_deviation(a: &Mat<C64>) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::Domain(format!("matrix is {rows}x{cols}, expected square")));
    }
    Ok(())
}

/// Full spectrum of a Hermitian matrix, descending. Rejects inputs whose
/// Hermitian defect exceeds `1e-8` times `max(1, max|A_ij|)`.
pub fn hermitian_eigenvalues(a: &Mat<C64>) -> Result<Spectrum> {
    check_square(a.nrows(), a.ncols())?;
    init_backend();
    let scale = max_abs(a).max(1.0);
    let dev = hermitian_deviation(a);
    if dev > 1e-8 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let real = (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].im == 0.0));
    let ev = if real {
        let r = Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re);
        r.self_adjoint_eigenvalues(Side::Lower)
    } else {
        a.self_adjoint_eigenvalues(Side::Lower)
    }
    .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(Spectrum::from_ascending(ev))
}

/// Spectrum of a real symmetric matrix (lower triangle is read), descending.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Spectrum> {
    check_square(a.nrows(), a.ncols())?;
    init_backend();
    let ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(Spectrum::from_ascending(ev))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    check_square(a.nrows(), a.ncols())?;
    init_backend();
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = e.S().column_vector().iter().map(|x| x.re).collect();
    Ok((s, e.U().to_owned()))
}

/// Eigenvalues (ascending) and eigenvectors of a real symmetric matrix.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    check_square(a.nrows(), a.ncols())?;
    init_backend();
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = e.S().column_vector().iter().copied().collect();
    Ok((s, e.U().to_owned()))
}

/// Real symmetric matrix unitarily similar to a Hermitian `K` with
/// `J K J = conj(K)`, where `J` reverses the index order.
///
/// Writing `K = A + iB`, the map `U = (I + iJ)/√2` gives `U* K U = A + JB`.
/// The entries are produced from `entry(i, j) = K_ij` on the lower triangle
/// only, so the complex matrix is never stored.
pub fn centrohermitian_real_form(n: usize, entry: impl Fn(usize, usize) -> C64) -> Mat<f64> {
    let mut r = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = entry(i, j).re + entry(n - 1 - i, j).im;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

fn max_abs(a: &Mat<C64>) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Schatten q-(quasi)norm from the singular values of `T`. Singular values
/// below `n·ε·s_max` are below the backward error of the SVD and count as
/// zero; for `q < 1` they would otherwise dominate through `s^q`.
pub fn schatten_q_norm(t: &Mat<C64>, q: f64) -> Result<SchattenReport> {
    check_exponent(q)?;
    init_backend();
    let s = t.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(schatten_from_singular_values(s, q))
}

fn check_exponent(q: f64) -> Result<()> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("Schatten exponent must be positive, got {q}")));
    }
    Ok(())
}

fn schatten_from_singular_values(mut s: Vec<f64>, q: f64) -> SchattenReport {
    s.sort_by(|a, b| b.total_cmp(a));
    let floor = s.len() as f64 * f64::EPSILON * s.first().copied().unwrap_or(0.0);
    for v in s.iter_mut() {
        if *v <= floor {
            *v = 0.0;
        }
    }
    let sum: f64 = s.iter().map(|x| x.powf(q)).sum();
    SchattenReport {
        q,
        value: sum.powf(1.0 / q),
        singular_values: s,
    }
}

/// Builds the report from eigenvalues of a Gram matrix `T*T` or `TT*`.
/// Eigenvalues below `n·ε·max` are rounding noise and count as zero.
pub fn schatten_from_gram_eigenvalues(gram_eigenvalues: Vec<f64>, q: f64) -> SchattenReport {
    let top = gram_eigenvalues.iter().fold(0.0_f64, |a, &x| a.max(x));
    let floor = gram_eigenvalues.len() as f64 * f64::EPSILON * top;
    let s = gram_eigenvalues
        .into_iter()
        .map(|x| if x > floor { x.sqrt() } else { 0.0 })
        .collect();
    schatten_from_singular_values(s, q)
}

/// Clips to `[0, 1]` when requested.
#[inline]
pub fn clip_unit(x: f64, clip: bool) -> f64 {
    if clip {
        x.clamp(0.0, 1.0)
    } else {
        x
    }
}

/// `Σ f(λ_i)` over a spectrum.
pub fn trace_of_spectrum(ev: &[f64], f: &SpectralFunction, clip: bool) -> f64 {
    ev.iter().map(|&x| f.eval(clip_unit(x, clip))).sum()
}

/// `tr f(A)` for Hermitian `A`.
pub fn trace_function(a: &Mat<C64>, f: &SpectralFunction, clip: bool) -> Result<f64> {
    let s = hermitian_eigenvalues(a)?;
    Ok(trace_of_spectrum(&s.eigenvalues, f, clip))
}

fn submatrix(a: &Mat<C64>, idx: &[usize]) -> Mat<C64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// `tr f(χAχ) - Σ_{i∈mask} f(A)_ii` for a discretized operator on an
/// enclosing region, with eigenvalues clipped to `[0, 1]`.
pub fn entropic_difference(
    a: &DiscretizedOperator,
    mask: &[bool],
    f: &SpectralFunction,
) -> Result<EntropicDifferenceResult> {
    let (restricted, masked) = entropic_traces(&a.matrix, mask, f)?;
    Ok(EntropicDifferenceResult {
        alpha: a.alpha,
        region: a.region,
        trace_restricted: restricted,
        trace_masked: masked,
        d_value: restricted - masked,
        kernel_id: a.kernel_id.clone(),
    })
}

/// The two traces entering the entropic difference of a Hermitian matrix.
pub fn entropic_traces(a: &Mat<C64>, mask: &[bool], f: &SpectralFunction) -> Result<(f64, f64)> {
    let n = a.nrows();
    if mask.len() != n {
        return Err(Error::Domain(format!("mask has {} entries for a {n}x{n} matrix", mask.len())));
    }
    let idx: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    if idx.is_empty() {
        return Ok((0.0, 0.0));
    }
    let restricted = trace_function(&submatrix(a, &idx), f, true)?;
    let scale = max_abs(a).max(1.0);
    let dev = hermitian_deviation(a);
    if dev > 1e-8 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (lam, v) = hermitian_eigen(a)?;
    let fl: Vec<f64> = lam.iter().map(|&x| f.eval(clip_unit(x, true))).collect();
    let masked = idx
        .iter()
        .map(|&i| (0..n).map(|k| fl[k] * v[(i, k)].norm_sqr()).sum::<f64>())
        .sum();
    Ok((restricted, masked))
}

/// Returns `(tr η(PΠP), tr η(P^c Π P^c))` for a projection `Π` and a 0/1 mask.
pub fn complement_duality_check(pi: &Mat<C64>, mask: &[bool]) -> Result<(f64, f64)> {
    let n = pi.nrows();
    check_square(n, pi.ncols())?;
    if mask.len() != n {
        return Err(Error::Domain("mask length does not match the matrix".into()));
    }
    let dev_h = hermitian_deviation(pi);
    let sq = pi * pi;
    let mut dev_p = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            dev_p = dev_p.max((sq[(i, j)] - pi[(i, j)]).norm());
        }
    }
    if dev_h.max(dev_p) > 1e-10 {
        return Err(Error::NotProjection { deviation: dev_h.max(dev_p) });
    }
    let eta = SpectralFunction::eta();
    let inside: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let outside: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    let tr = |idx: &[usize]| -> Result<f64> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        trace_function(&submatrix(pi, idx), &eta, true)
    };
    Ok((tr(&inside)?, tr(&outside)?))
}

/// `θ₂ = (∫_Λ ‖t(·,u')‖²_{W₂¹(Λ)} du')^{1/2}` with Gauss–Legendre panels on
/// both variables and a central difference for `∂_u t`.
pub fn sobolev_kernel_norm(
    kernel: impl Fn(f64, f64) -> C64,
    region: &Interval,
    nodes_per_panel: usize,
    panels: usize,
) -> f64 {
    let (a, b) = (region.u0 - region.rho, region.u0);
    let (x, w) = crate::quadrature::gl_panels(a, b, panels, nodes_per_panel);
    let h = 1e-5 * region.rho.max(1e-300);
    let mut total = 0.0;
    for (up, wp) in x.iter().zip(&w) {
        let mut inner = 0.0;
        for (u, wu) in x.iter().zip(&w) {
            let t = kernel(*u, *up);
            let dt = (kernel(u + h, *up) - kernel(u - h, *up)) / (2.0 * h);
            inner += wu * (t.norm_sqr() + dt.norm_sqr());
        }
        total += wp * inner;
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::quadrature::gl_on;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
        let g = Mat::<C64>::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = &g + g.adjoint();
        Mat::from_fn(n, n, |i, j| h[(i, j)] * 0.5)
    }

    pub(crate) fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
        let h = random_hermitian(n, rng);
        let (_, v) = hermitian_eigen(&h).unwrap();
        v
    }

    pub(crate) fn random_projection(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
        let u = random_unitary(n, rng);
        Mat::from_fn(n, n, |i, j| (0..rank).map(|k| u[(i, k)] * u[(j, k)].conj()).sum())
    }

    #[test]
    fn diagonal_spectrum() {
        let a = Mat::<C64>::from_fn(2, 2, |i, j| if i == j { C64::new([0.2, 0.8][i], 0.0) } else { C64::new(0.0, 0.0) });
        let s = hermitian_eigenvalues(&a).unwrap();
        assert!((s.eigenvalues[0] - 0.8).abs() < 1e-15 && (s.eigenvalues[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn projection_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_projection(9, 4, &mut rng);
        let s = hermitian_eigenvalues(&p).unwrap();
        for (i, v) in s.eigenvalues.iter().enumerate() {
            let e = if i < 4 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_root_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(3, &mut rng);
        // characteristic polynomial λ³ - c2 λ² + c1 λ - c0
        let tr = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]).re;
        let a2 = &a * &a;
        let tr2 = (a2[(0, 0)] + a2[(1, 1)] + a2[(2, 2)]).re;
        let c1 = 0.5 * (tr * tr - tr2);
        let det = (a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]))
            .re;
        // trigonometric solution for three real roots
        let pp = (tr * tr - 3.0 * c1) / 9.0;
        let qq = (-2.0 * tr.powi(3) + 9.0 * tr * c1 - 27.0 * det) / 54.0;
        let theta = (qq / pp.powf(1.5)).clamp(-1.0, 1.0).acos();
        let mut roots: Vec<f64> = (0..3)
            .map(|k| -2.0 * pp.sqrt() * ((theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + tr / 3.0)
            .collect();
        roots.sort_by(|a, b| b.total_cmp(a));
        let s = hermitian_eigenvalues(&a).unwrap();
        for (x, y) in roots.iter().zip(&s.eigenvalues) {
            assert!((x - y).abs() < 1e-10, "{roots:?} {:?}", s.eigenvalues);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Mat::<C64>::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(hermitian_eigenvalues(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn schatten_examples() {
        let id = Mat::<C64>::from_fn(2, 2, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        assert!((schatten_q_norm(&id, 1.0).unwrap().value - 2.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<C64> = (0..5).map(|_| C64::new(rng.random(), rng.random())).collect();
        let y: Vec<C64> = (0..5).map(|_| C64::new(rng.random(), rng.random())).collect();
        let t = Mat::<C64>::from_fn(5, 5, |i, j| x[i] * y[j].conj());
        let op = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() * y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for q in [0.3, 0.5, 1.0, 2.0] {
            let v = schatten_q_norm(&t, q).unwrap().value;
            assert!((v - op).abs() < 1e-6 * op, "q={q} {v} {op}");
        }
    }

    #[test]
    fn schatten_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Mat::<C64>::from_fn(8, 8, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let u = random_unitary(8, &mut rng);
        let b = u.adjoint() * &a * &u;
        for q in [0.5, 1.0, 2.0] {
            let x = schatten_q_norm(&a, q).unwrap().value;
            let y = schatten_q_norm(&b, q).unwrap().value;
            assert!((x - y).abs() < 1e-10 * x.max(1.0));
        }
    }

    #[test]
    fn trace_function_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(6, &mut rng);
        let t = trace_function(&a, &SpectralFunction::identity(), false).unwrap();
        let direct: f64 = (0..6).map(|i| a[(i, i)].re).sum();
        assert!((t - direct).abs() < 1e-12);

        let p = random_projection(6, 2, &mut rng);
        assert!(trace_function(&p, &SpectralFunction::eta(), true).unwrap().abs() < 1e-10);

        // direct eigen-then-sum with a cubic
        let f = SpectralFunction::new("cube", |x| x * x * x);
        let t = trace_function(&a, &f, false).unwrap();
        let a3 = &a * &a * &a;
        let direct: f64 = (0..6).map(|i| a3[(i, i)].re).sum();
        assert!((t - direct).abs() < 1e-12);
    }

    fn op(m: Mat<C64>) -> DiscretizedOperator {
        let n = m.nrows();
        DiscretizedOperator {
            nodes: (0..n).map(|i| i as f64).collect(),
            weights: vec![1.0; n],
            matrix: m,
            symmetrized: true,
            region: Interval::new(0.0, 1.0).unwrap(),
            alpha: 1.0,
            kernel_id: "test".into(),
        }
    }

    #[test]
    fn entropic_difference_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_hermitian(7, &mut rng);
        let r = entropic_difference(&op(a), &[true; 7], &SpectralFunction::quadratic()).unwrap();
        assert!(r.d_value.abs() < 1e-12);

        let p = random_projection(8, 3, &mut rng);
        let mask = [true, false, true, true, false, false, true, false];
        let r = entropic_difference(&op(p), &mask, &SpectralFunction::eta()).unwrap();
        assert!(r.trace_masked.abs() < 1e-10);
        assert!(r.d_value >= 0.0);
    }

    #[test]
    fn entropic_difference_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = random_unitary(8, &mut rng);
        let lam: Vec<f64> = (0..8).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
        let a = Mat::<C64>::from_fn(8, 8, |i, j| (0..8).map(|k| u[(i, k)] * lam[k] * u[(j, k)].conj()).sum());
        let mask = [true, true, false, true, false, true, true, false];
        let f = SpectralFunction::eta();
        let r = entropic_difference(&op(a.clone()), &mask, &f).unwrap();
        // dense oracle: P A P in full dimension, P f(A) P
        let pap = Mat::<C64>::from_fn(8, 8, |i, j| if mask[i] && mask[j] { a[(i, j)] } else { C64::new(0.0, 0.0) });
        let t1 = trace_function(&pap, &f, true).unwrap();
        let fa = Mat::<C64>::from_fn(8, 8, |i, j| (0..8).map(|k| u[(i, k)] * f.eval(lam[k]) * u[(j, k)].conj()).sum());
        let t2: f64 = (0..8).filter(|&i| mask[i]).map(|i| fa[(i, i)].re).sum();
        assert!((r.d_value - (t1 - t2)).abs() < 1e-12);
    }

    #[test]
    fn duality_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let p = random_projection(8, 3, &mut rng);
        let mask: Vec<bool> = (0..8).map(|_| rng.random::<bool>()).collect();
        let (a, b) = complement_duality_check(&p, &mask).unwrap();
        assert!((a - b).abs() < 1e-10);

        let id = Mat::<C64>::from_fn(5, 5, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let (a, b) = complement_duality_check(&id, &[true, false, true, false, true]).unwrap();
        assert!(a.abs() < 1e-14 && b.abs() < 1e-14);

        // commuting: diagonal projection
        let d = Mat::<C64>::from_fn(5, 5, |i, j| C64::new(if i == j && i % 2 == 0 { 1.0 } else { 0.0 }, 0.0));
        let (a, b) = complement_duality_check(&d, &[true, true, false, false, true]).unwrap();
        assert!(a.abs() < 1e-14 && b.abs() < 1e-14);

        let not_p = random_hermitian(4, &mut rng);
        assert!(matches!(complement_duality_check(&not_p, &[true; 4]), Err(Error::NotProjection { .. })));
    }

    #[test]
    fn centro_real_form_preserves_spectrum() {
        let n = 9;
        let k = |i: usize, j: usize| {
            let d = i as f64 - j as f64;
            C64::new(1.0, 0.7 * d) / C64::new(1.0 + 0.1 * d * d, 0.0)
        };
        let full = Mat::<C64>::from_fn(n, n, k);
        let a = hermitian_eigenvalues(&full).unwrap();
        let b = symmetric_eigenvalues(&centrohermitian_real_form(n, k)).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let reg = Interval::new(0.0, 1.0).unwrap();
        assert_eq!(sobolev_kernel_norm(|_, _| C64::new(0.0, 0.0), &reg, 16, 4), 0.0);
        // φ(u) = sin(3u), ψ(u') = u'^2 on (-1, 0)
        let v = sobolev_kernel_norm(|u, up| C64::new((3.0 * u).sin() * up * up, 0.0), &reg, 16, 4);
        let (x, w) = gl_on(-1.0, 0.0, 40);
        let phi2: f64 = x.iter().zip(&w).map(|(u, w)| w * ((3.0 * u).sin().powi(2) + 9.0 * (3.0 * u).cos().powi(2))).sum();
        let psi2: f64 = x.iter().zip(&w).map(|(u, w)| w * u.powi(4)).sum();
        assert!((v - (phi2 * psi2).sqrt()).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trace_norm_dominates_trace(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Mat::<C64>::from_fn(6, 6, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let tr: C64 = (0..6).map(|i| a[(i, i)]).sum();
            prop_assert!(schatten_q_norm(&a, 1.0).unwrap().value >= tr.norm() - 1e-12);
        }

        #[test]
        fn q_triangle(seed in 0u64..1000, qi in 0usize..3) {
            let q = [0.5, 0.8, 1.0][qi];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Mat::<C64>::from_fn(5, 5, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let b = Mat::<C64>::from_fn(5, 5, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let s = &a + &b;
            let lhs = schatten_q_norm(&s, q).unwrap().q_power();
            let rhs = schatten_q_norm(&a, q).unwrap().q_power() + schatten_q_norm(&b, q).unwrap().q_power();
            prop_assert!(lhs <= rhs + 1e-10);
        }

        #[test]
        fn appending_zeros_keeps_norm(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Mat::<C64>::from_fn(4, 4, |_, _| C64::new(rng.random::<f64>(), 0.0));
            let b = Mat::<C64>::from_fn(6, 6, |i, j| if i < 4 && j < 4 { a[(i, j)] } else { C64::new(0.0, 0.0) });
            let x = schatten_q_norm(&a, 0.7).unwrap().value;
            let y = schatten_q_norm(&b, 0.7).unwrap().value;
            prop_assert!((x - y).abs() < 1e-6 * x);
        }

        #[test]
        fn permutation_invariance(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(6, &mut rng);
            let mask: Vec<bool> = (0..6).map(|_| rng.random::<bool>()).collect();
            let mut perm: Vec<usize> = (0..6).collect();
            for i in (1..6).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let b = Mat::<C64>::from_fn(6, 6, |i, j| a[(perm[i], perm[j])]);
            let pm: Vec<bool> = (0..6).map(|i| mask[perm[i]]).collect();
            let f = SpectralFunction::quadratic();
            let (r1, m1) = entropic_traces(&a, &mask, &f).unwrap();
            let (r2, m2) = entropic_traces(&b, &pm, &f).unwrap();
            prop_assert!(((r1 - m1) - (r2 - m2)).abs() < 1e-10);
        }

        #[test]
        fn duality_random(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..=12);
            let rank = rng.random_range(0..=n);
            let p = random_projection(n, rank, &mut rng);
            let mask: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
            let (a, b) = complement_duality_check(&p, &mask).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
