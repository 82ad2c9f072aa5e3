//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! status 1 if any criterion fails.

use faer::Mat;
use horizon_core::angular::AngularMode;
use horizon_core::entropy::{u_functional, SpectralFunction};
use horizon_core::frequency::{limiting_frequency_difference, FrequencyGridSpec};
use horizon_core::geometry::BlackHole;
use horizon_core::kernels::{eta_limiting_kernel, eta_limiting_kernel_closed, limiting_kernel};
use horizon_core::opalpha::{spectral_mapping_check, translate_check, Interval, TorusGrid};
use horizon_core::quadrature::QuadratureConfig;
use horizon_core::radial::{check_asymptotic_bound, integrate_f_ode, AsymptoticBound, T12Strategy};
use horizon_core::spectral::{complement_duality_check, hermitian_eigen};
use horizon_core::studies::{
    bh_entropy_heuristic, schatten_growth_study, scaling_study_limiting, u0_limit_study_full, widom_prediction,
    ScalingStudyConfig, SchattenGrowthSpec,
};
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    outcome(false, format!("error: {e}"))
}

const ALPHAS: [f64; 5] = [32.0, 64.0, 128.0, 256.0, 512.0];

fn u_functional_value() -> Outcome {
    let t = Instant::now();
    match u_functional(&SpectralFunction::eta(), 1.0, &QuadratureConfig::default()) {
        Ok(v) => {
            let el = t.elapsed().as_secs_f64();
            let err = (v - PI * PI / 3.0).abs();
            outcome(err <= 1e-8 && el < 1.0, format!("U(1;η) = {v:.12}, |err| = {err:.2e}, {el:.3} s"))
        }
        Err(e) => failed(e),
    }
}

fn main_law() -> Outcome {
    let t = Instant::now();
    let cfg = ScalingStudyConfig::limiting(1.0, 1.0, ALPHAS.to_vec());
    match scaling_study_limiting(&cfg, &SpectralFunction::eta()) {
        Ok(s) => {
            let el = t.elapsed().as_secs_f64();
            let total = s.total.fit.slope;
            let ch = [s.channels[0].fit.slope, s.channels[1].fit.slope];
            let ok = (total - 1.0 / 3.0).abs() <= 0.1 / 3.0
                && ch.iter().all(|c| (c - 1.0 / 6.0).abs() <= 0.1 / 6.0)
                && el <= 1800.0;
            let d: Vec<String> = s.total.results.iter().map(|r| format!("{:.4}", r.d_value)).collect();
            outcome(
                ok,
                format!(
                    "slope {total:.5} (target 1/3), channels {:.5} {:.5} (target 1/6), r² {:.6}, d = [{}], {el:.0} s",
                    ch[0],
                    ch[1],
                    s.total.fit.r_squared,
                    d.join(", ")
                ),
            )
        }
        Err(e) => failed(e),
    }
}

fn masked_trace() -> Outcome {
    let quad = QuadratureConfig::default();
    let mut worst = 0.0_f64;
    for &(mass, alpha, rho) in &[(1.0, 32.0, 1.0), (1.0, 256.0, 4.0), (2.0, 100.0, 0.5), (0.5, 64.0, 3.0)] {
        let diag = match eta_limiting_kernel(1, mass, alpha, 0.3, 0.3, &quad) {
            Ok(v) => v,
            Err(e) => return failed(e),
        };
        let closed = rho * alpha * PI / (12.0 * mass);
        worst = worst.max((rho * diag.re - closed).abs() / closed);
    }
    outcome(worst <= 1e-4, format!("max relative error {worst:.2e} over 4 (M, α, ρ)"))
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
    let g = Mat::<C64>::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let h = Mat::<C64>::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    hermitian_eigen(&h).expect("eigendecomposition").1
}

fn complement_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=12usize);
        let rank = rng.random_range(0..=n);
        let u = random_unitary(n, &mut rng);
        let pi = Mat::<C64>::from_fn(n, n, |i, j| (0..rank).map(|k| u[(i, k)] * u[(j, k)].conj()).sum());
        let mask: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        match complement_duality_check(&pi, &mask) {
            Ok((a, b)) => worst = worst.max((a - b).abs()),
            Err(e) => return failed(e),
        }
    }
    outcome(worst <= 1e-10, format!("max |tr η(PΠP) - tr η(PᶜΠPᶜ)| = {worst:.2e} over 200 pairs"))
}

fn translation() -> Outcome {
    let reg = Interval::new(0.0, 1.0).unwrap();
    let mut worst = 0.0_f64;
    for which in [1u8, 2] {
        for &c in &[-37.25, -3.0, 0.5, 11.125] {
            let lim = translate_check(|u, up| limiting_kernel(which, 1.0, 16.0, u, up), &reg, c, 96);
            let eta = translate_check(|u, up| eta_limiting_kernel_closed(which, 1.0, 16.0, u, up), &reg, c, 96);
            for r in [lim, eta] {
                match r {
                    Ok(r) => {
                        worst = worst.max((r.trace.0 - r.trace.1).abs() / r.trace.0.abs().max(1.0));
                        for (_, a, b) in &r.schatten {
                            worst = worst.max((a - b).abs() / a.abs().max(1.0));
                        }
                    }
                    Err(e) => return failed(e),
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("max relative deviation {worst:.2e} (trace, q = 0.5, q = 1)"))
}

fn schatten_growth() -> Outcome {
    let t = Instant::now();
    let k = Interval::new(0.0, 1.0).unwrap();
    let alphas = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
    match schatten_growth_study(&k, (0.0, 1.0), 1.0, &alphas, &SchattenGrowthSpec::default()) {
        Ok(s) => {
            let v: Vec<String> = s.values.iter().map(|x| format!("{x:.4}")).collect();
            outcome(
                s.fit.r_squared >= 0.99,
                format!(
                    "r² {:.6}, slope {:.4}, ‖·‖₁ = [{}], padding-doubling change {:.1e}, {:.0} s",
                    s.fit.r_squared,
                    s.fit.slope,
                    v.join(", "),
                    s.padding_doubling_change,
                    t.elapsed().as_secs_f64()
                ),
            )
        }
        Err(e) => failed(e),
    }
}

fn bound_tuples() -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for &mass in &[1.0, 2.0] {
        for &(omega, m) in &[(0.3, 0.1), (1.2, 0.1), (-0.7, 0.5), (2.0, 1.0), (0.05, 0.1), (-1.5, 0.2)] {
            for &lambda in &[1.5, 3.5] {
                out.push((omega, m, lambda, mass));
            }
        }
    }
    out
}

fn asymptotic_bound() -> Outcome {
    let tuples = bound_tuples();
    let (mut violated, mut worst, mut corrected_ok) = (0usize, 0.0_f64, 0usize);
    for &(omega, m, lambda, mass) in &tuples {
        let bh = BlackHole::new(mass).unwrap();
        let one = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let sol = match integrate_f_ode(omega, lambda, m, &bh, -100.0 * mass, 0.0, one, 1e-11) {
            Ok(s) => s,
            Err(e) => return failed(e),
        };
        let stated = check_asymptotic_bound(&sol, &AsymptoticBound::stated(m, lambda, mass, 0.0, 1.0), 1e-12);
        if !stated.holds() {
            violated += 1;
        }
        worst = worst.max(stated.max_ratio);
        if check_asymptotic_bound(&sol, &AsymptoticBound::corrected(m, lambda, mass, 0.0, 1.0), 1e-12).holds() {
            corrected_ok += 1;
        }
    }
    outcome(
        violated == 0,
        format!(
            "rate 1/M: {violated}/{} tuples violate, worst ratio {worst:.2e}; rate 1/(4M) holds for {corrected_ok}/{}",
            tuples.len(),
            tuples.len()
        ),
    )
}

fn widom() -> Outcome {
    let cfg = ScalingStudyConfig::limiting(1.0, 1.0, ALPHAS.to_vec());
    match widom_prediction(&SpectralFunction::quadratic(), 1, &cfg) {
        Ok(w) => {
            let target = 1.0 / (2.0 * PI * PI);
            let rel = (w.measured.fit.slope - target).abs() / target;
            outcome(
                rel <= 0.1 && (w.predicted_slope - target).abs() < 1e-10,
                format!("slope {:.6} vs 1/(2π²) = {target:.6}, relative error {rel:.2e}", w.measured.fit.slope),
            )
        }
        Err(e) => failed(e),
    }
}

struct FullPathRun {
    relative_256: f64,
    spread: f64,
    u0_change: f64,
    detail_10: String,
}

const STRATEGIES: [T12Strategy; 3] = [
    T12Strategy::Zero,
    T12Strategy::Constant { re: 0.4, im: 0.0 },
    T12Strategy::Constant { re: 0.0, im: 0.4 },
];

fn full_path_256(mode: &AngularMode, bh: &BlackHole, grid: &FrequencyGridSpec) -> Result<FullPathRun, String> {
    let u0s = [-40.0, -60.0, -80.0];
    let study = u0_limit_study_full(mode, bh, 0.1, 1.0 / 256.0, &u0s, 4.0, &STRATEGIES, grid).map_err(|e| e.to_string())?;
    let region = Interval::new(-60.0, 4.0).unwrap();
    let lim = limiting_frequency_difference(1.0, 256.0, &region, &SpectralFunction::eta(), grid).map_err(|e| e.to_string())?;
    let full = study.d_at(-60.0, 0).unwrap();
    let mut spread = 0.0_f64;
    for &u0 in &u0s {
        let v: Vec<f64> = (0..STRATEGIES.len()).map(|i| study.d_at(u0, i).unwrap()).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let s = (v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)) / mean.abs();
        spread = spread.max(s);
    }
    let (d40, d80) = (study.d_at(-40.0, 0).unwrap(), study.d_at(-80.0, 0).unwrap());
    let u0_change = (d40 - d80).abs() / d80.abs();
    Ok(FullPathRun {
        relative_256: (full - lim.d_value).abs() / lim.d_value.abs(),
        spread,
        u0_change,
        detail_10: format!("d(-40) {d40:.6}, d(-80) {d80:.6}, full {full:.6}, limiting {:.6}", lim.d_value),
    })
}

fn full_path_relative(mode: &AngularMode, bh: &BlackHole, alpha: f64, grid: &FrequencyGridSpec) -> Result<f64, String> {
    let region = Interval::new(-60.0, 4.0).unwrap();
    let s = horizon_core::studies::compare_full_with_limiting(mode, bh, 0.1, 1.0 / alpha, &region, &T12Strategy::Zero, grid)
        .map_err(|e| e.to_string())?;
    Ok(s.relative_difference)
}

fn spectral_mapping() -> Outcome {
    let mut worst = 0.0_f64;
    for &(alpha, length, n) in &[(16.0, 1.0, 192usize), (16.0, 2.0, 384), (32.0, 1.0, 384)] {
        match spectral_mapping_check(1, 1.0, alpha, &TorusGrid { length, n }, 400) {
            Ok(r) => worst = worst.max(r.relative_difference),
            Err(e) => return failed(e),
        }
    }
    outcome(worst <= 0.005, format!("max relative trace difference {worst:.2e} over 3 grids"))
}

fn mode_counting() -> Outcome {
    match bh_entropy_heuristic(1.0, 0.1) {
        Ok(r) => outcome(
            r.occupied_count == 100 && r.s_bh == 100.0 / 6.0,
            format!("count {}, S = {}", r.occupied_count, r.s_bh),
        ),
        Err(e) => failed(e),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("1 u-functional", u_functional_value());
    report("2 main-law", main_law());
    report("3 masked-trace", masked_trace());
    report("4 complement-duality", complement_duality());
    report("5 translation", translation());
    report("6 schatten-growth", schatten_growth());
    report("7 asymptotic-bound", asymptotic_bound());
    report("8 widom", widom());

    let bh = BlackHole::new(1.0).unwrap();
    let mode = AngularMode::compute(0.5, 1, 64).unwrap_or(AngularMode::with_lambda(0.5, 1, 1.5));
    let grid = FrequencyGridSpec::default();
    match full_path_256(&mode, &bh, &grid) {
        Ok(run) => {
            let r512 = full_path_relative(&mode, &bh, 512.0, &grid);
            let o9 = match r512 {
                Ok(r512) => outcome(
                    run.relative_256 <= 0.15 && r512 <= run.relative_256,
                    format!("relative difference {:.3e} at ε = M/256, {r512:.3e} at ε = M/512", run.relative_256),
                ),
                Err(e) => failed(e),
            };
            report("9 full-vs-limiting", o9);
            report(
                "10 error-term-decay",
                outcome(
                    run.spread <= 0.01 && run.u0_change <= 0.02,
                    format!("t12 spread {:.2e}, u0 change {:.2e}; {}", run.spread, run.u0_change, run.detail_10),
                ),
            );
        }
        Err(e) => {
            report("9 full-vs-limiting", failed(&e));
            report("10 error-term-decay", failed(&e));
        }
    }
    report("11 spectral-mapping", spectral_mapping());
    report("12 mode-counting", mode_counting());

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
