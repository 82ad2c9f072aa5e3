use crate::cache::{Cache, CacheKey, CacheRecord};
use crate::config::{Command, FunctionKind, RunConfig, T12Kind};
use crate::error::Result;
use crate::output::{write_results, write_xy, ResultRecord, StudySummary};
use faer::Mat;
use horizon_core::angular::{angular_symmetry_defect, AngularMode};
use horizon_core::entropy::{u_functional, SpectralFunction};
use horizon_core::frequency::{full_path_basis_with, full_path_difference, FullPathBasis, FullPathSpec};
use horizon_core::geometry::{lambert_w, BlackHole};
use horizon_core::kernels::limiting_kernel;
use horizon_core::opalpha::{default_node_count, interval_rule, spectral_mapping_check, translate_check, Interval, NodeRule, TorusGrid};
use horizon_core::quadrature::QuadratureConfig;
use horizon_core::radial::{fundamental_solutions, T12Strategy};
use horizon_core::spectral::{complement_duality_check, hermitian_eigen, EntropicDifferenceResult};
use horizon_core::studies::{
    bh_entropy_heuristic, limiting_difference, masked_density, mode_entropy, regress_ln_alpha, schatten_growth_study,
    scaling_study_limiting, u0_limit_study_on_basis, widom_prediction, RegressionResult, ScalingStudy, ScalingStudyConfig,
    SchattenGrowthSpec,
};
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::PathBuf;

/// What a command produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: StudySummary,
    pub files: Vec<PathBuf>,
    /// Text for standard output.
    pub report: String,
    /// Failed checks of `verify-suite`.
    pub failures: usize,
}

pub fn cache_for(cfg: &RunConfig) -> Cache {
    let fallback = cfg.cache_dir.clone().unwrap_or_else(|| cfg.output_dir.join("cache"));
    Cache::locate(&fallback)
}

fn function(kind: FunctionKind) -> SpectralFunction {
    match kind {
        FunctionKind::Eta => SpectralFunction::eta(),
        FunctionKind::Quadratic => SpectralFunction::quadratic(),
        FunctionKind::Identity => SpectralFunction::identity(),
    }
}

pub fn angular_mode(cfg: &RunConfig) -> Result<AngularMode> {
    let (k, n) = cfg.mode.map(|m| (m.k, m.n)).unwrap_or((0.5, 1));
    Ok(match cfg.lambda_override {
        Some(l) => AngularMode::with_lambda(k, n, l),
        None => AngularMode::compute(k, n, 64)?,
    })
}

fn t12_strategy(kind: T12Kind, value: (f64, f64)) -> T12Strategy {
    match kind {
        T12Kind::Zero => T12Strategy::Zero,
        T12Kind::Constant => T12Strategy::Constant { re: value.0, im: value.1 },
        T12Kind::Fit => T12Strategy::CompletenessFit { re: value.0, im: value.1 },
    }
}

fn limiting_config(cfg: &RunConfig) -> ScalingStudyConfig {
    ScalingStudyConfig {
        u0: cfg.u0,
        ..ScalingStudyConfig::limiting(cfg.mass, cfg.rho, cfg.alphas.clone())
    }
}

/// Channel bases for the full path, with radial solutions on the band read
/// from and written to `cache`.
pub fn cached_basis(cfg: &RunConfig, mode: &AngularMode, eps: f64, cache: Option<&Cache>) -> Result<FullPathBasis> {
    let bh = BlackHole::new(cfg.mass)?;
    let mut spec = FullPathSpec::new(cfg.fermion_mass, eps);
    spec.grid.tau = cfg.omega_min_factor.exp();
    let radial = spec.radial;
    let mut cache_error = None;
    let basis = full_path_basis_with(mode, &bh, cfg.rho, &spec, |w| {
        let key = CacheKey {
            omega: w,
            lambda: mode.lambda,
            m: cfg.fermion_mass,
            mass: cfg.mass,
            tol: radial.tol,
            u_start_over_m: radial.u_start_over_m,
            u_max_over_m: radial.u_max_over_m,
        };
        if let Some(c) = cache {
            match c.load(&key) {
                Ok(Some(rec)) => return Ok(rec.f0),
                Ok(None) => {}
                Err(e) => {
                    let msg = e.to_string();
                    cache_error = Some(e);
                    return Err(horizon_core::Error::MissingSolution(msg));
                }
            }
        }
        let fs = fundamental_solutions(w, mode, cfg.fermion_mass, &bh, &radial)?;
        if let Some(c) = cache {
            if let Err(e) = c.store(&key, &CacheRecord::from_solution(&key, &fs.x1)) {
                let msg = e.to_string();
                cache_error = Some(e);
                return Err(horizon_core::Error::MissingSolution(msg));
            }
        }
        Ok(fs.x1.f0)
    });
    match (basis, cache_error) {
        (_, Some(e)) => Err(e),
        (b, None) => Ok(b?),
    }
}

fn record(id: &str, cfg: &RunConfig, r: &EntropicDifferenceResult, fit: Option<&RegressionResult>) -> ResultRecord {
    ResultRecord {
        study_id: id.to_string(),
        alpha: Some(r.alpha),
        u0: Some(r.region.u0),
        rho: Some(r.region.rho),
        mass: Some(cfg.mass),
        m: Some(cfg.fermion_mass),
        trace_restricted: Some(r.trace_restricted),
        trace_masked: Some(r.trace_masked),
        d_value: Some(r.d_value),
        slope: fit.map(|f| f.slope),
        slope_err: fit.map(|f| f.slope_err),
        r_squared: fit.map(|f| f.r_squared),
        ..Default::default()
    }
}

fn study_records(id: &str, cfg: &RunConfig, s: &ScalingStudy) -> Vec<ResultRecord> {
    s.results.iter().map(|r| record(id, cfg, r, Some(&s.fit))).collect()
}

fn with_mode(mut r: ResultRecord, mode: &AngularMode) -> ResultRecord {
    r.k = Some(mode.k);
    r.n = Some(mode.n);
    r.lambda = Some(mode.lambda);
    r
}

struct Produced {
    records: Vec<ResultRecord>,
    values: Vec<(String, f64)>,
    report: String,
    extra_files: Vec<PathBuf>,
    failures: usize,
}

impl Produced {
    fn new(records: Vec<ResultRecord>, mut values: Vec<(String, f64)>) -> Self {
        values.retain(|(_, v)| v.is_finite());
        let report = values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        Self {
            records,
            values,
            report,
            extra_files: Vec::new(),
            failures: 0,
        }
    }
}

fn scaling_study(cfg: &RunConfig) -> Result<Produced> {
    let s = scaling_study_limiting(&limiting_config(cfg), &function(cfg.function))?;
    let mut records = study_records("scaling-study/total", cfg, &s.total);
    records.extend(study_records("scaling-study/channel-1", cfg, &s.channels[0]));
    records.extend(study_records("scaling-study/channel-2", cfg, &s.channels[1]));
    std::fs::create_dir_all(&cfg.output_dir)?;
    let dat = cfg.output_dir.join("scaling-study.dat");
    let points: Vec<(f64, f64)> = s.total.results.iter().map(|r| (r.alpha.ln(), r.d_value)).collect();
    write_xy(&dat, "ln(alpha) d_value", &points)?;
    let mut p = Produced::new(
        records,
        vec![
            ("slope".into(), s.total.fit.slope),
            ("slope_channel_1".into(), s.channels[0].fit.slope),
            ("slope_channel_2".into(), s.channels[1].fit.slope),
            ("r_squared".into(), s.total.fit.r_squared),
        ],
    );
    p.extra_files.push(dat);
    Ok(p)
}

fn widom_check(cfg: &RunConfig) -> Result<Produced> {
    let w = widom_prediction(&function(cfg.function), cfg.channel, &limiting_config(cfg))?;
    let id = format!("widom-check/channel-{}", cfg.channel);
    Ok(Produced::new(
        study_records(&id, cfg, &w.measured),
        vec![
            ("predicted_slope".into(), w.predicted_slope),
            ("measured_slope".into(), w.measured.fit.slope),
            ("relative_error".into(), w.relative_error()),
        ],
    ))
}

fn full_path_requested(cfg: &RunConfig) -> bool {
    cfg.fermion_mass > 0.0 || cfg.mode.is_some() || cfg.lambda_override.is_some()
}

fn mode_entropy_command(cfg: &RunConfig, cache: Option<&Cache>) -> Result<Produced> {
    if !full_path_requested(cfg) {
        let me = mode_entropy(&limiting_config(cfg), None)?;
        return Ok(Produced::new(
            study_records("mode-entropy/limiting", cfg, &me.study),
            vec![("S_kn".into(), me.s_kn), ("slope".into(), me.study.fit.slope)],
        ));
    }
    let mode = angular_mode(cfg)?;
    let region = Interval::new(cfg.u0, cfg.rho)?;
    let t12 = t12_strategy(cfg.t12_strategy, cfg.t12_value).value();
    let mut results = Vec::new();
    for &alpha in &cfg.alphas {
        let basis = cached_basis(cfg, &mode, cfg.mass / alpha, cache)?;
        results.push(full_path_difference(&basis, &region, t12, &SpectralFunction::eta())?.result);
    }
    let a: Vec<f64> = results.iter().map(|r| r.alpha).collect();
    let d: Vec<f64> = results.iter().map(|r| r.d_value).collect();
    let fit = regress_ln_alpha(&a, &d)?;
    let records = results
        .iter()
        .map(|r| with_mode(record("mode-entropy/full", cfg, r, Some(&fit)), &mode))
        .collect();
    Ok(Produced::new(records, vec![("S_kn".into(), 0.5 * fit.slope), ("slope".into(), fit.slope)]))
}

fn u0_study(cfg: &RunConfig, cache: Option<&Cache>) -> Result<Produced> {
    let mode = angular_mode(cfg)?;
    let basis = cached_basis(cfg, &mode, cfg.epsilon(), cache)?;
    let strategies: Vec<T12Strategy> = cfg
        .t12_values
        .iter()
        .map(|&v| if v == (0.0, 0.0) { T12Strategy::Zero } else { T12Strategy::Constant { re: v.0, im: v.1 } })
        .collect();
    let s = u0_limit_study_on_basis(&basis, &cfg.u0_list, &strategies)?;
    let records = s
        .rows
        .iter()
        .map(|r| {
            with_mode(
                ResultRecord {
                    study_id: format!("u0-study/t12={}", crate::config::format_complex(r.t12)),
                    alpha: Some(s.alpha),
                    u0: Some(r.u0),
                    rho: Some(s.rho),
                    mass: Some(cfg.mass),
                    m: Some(cfg.fermion_mass),
                    trace_restricted: Some(r.trace_restricted),
                    trace_masked: Some(r.trace_masked),
                    d_value: Some(r.d_value),
                    ..Default::default()
                },
                &mode,
            )
        })
        .collect();
    Ok(Produced::new(
        records,
        vec![("stabilization".into(), s.stabilization), ("spread".into(), s.spread)],
    ))
}

fn schatten_growth(cfg: &RunConfig) -> Result<Produced> {
    let k = Interval::new(cfg.u0, cfg.rho)?;
    let s = schatten_growth_study(&k, cfg.window, cfg.q, &cfg.alphas, &SchattenGrowthSpec::default())?;
    let records = s
        .alphas
        .iter()
        .zip(&s.values)
        .map(|(&a, &v)| ResultRecord {
            study_id: format!("schatten-growth/q={}", cfg.q),
            alpha: Some(a),
            u0: Some(cfg.u0),
            rho: Some(cfg.rho),
            d_value: Some(v),
            slope: Some(s.fit.slope),
            slope_err: Some(s.fit.slope_err),
            r_squared: Some(s.fit.r_squared),
            ..Default::default()
        })
        .collect();
    Ok(Produced::new(
        records,
        vec![
            ("slope".into(), s.fit.slope),
            ("r_squared".into(), s.fit.r_squared),
            ("padding_doubling_change".into(), s.padding_doubling_change),
        ],
    ))
}

struct Check {
    name: &'static str,
    deviation: f64,
    tolerance: f64,
}

fn random_projection(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> Result<Mat<C64>> {
    let g = Mat::<C64>::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let h = Mat::<C64>::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    let (_, u) = hermitian_eigen(&h)?;
    Ok(Mat::from_fn(n, n, |i, j| (0..rank).map(|k| u[(i, k)] * u[(j, k)].conj()).sum()))
}

fn verify_suite(cfg: &RunConfig) -> Result<Produced> {
    let quad = QuadratureConfig::default();
    let eta = SpectralFunction::eta();
    let mut checks = Vec::new();
    let mut add = |name, deviation: f64, tolerance| checks.push(Check { name, deviation, tolerance });

    add("u-functional U(1;eta) = pi^2/3", (u_functional(&eta, 1.0, &quad)? - PI * PI / 3.0).abs(), 1e-8);
    add("masked density int eta(s)/s = pi^2/6", (masked_density(&eta)? - PI * PI / 6.0).abs(), 1e-9);
    let widom = u_functional(&SpectralFunction::quadratic(), 1.0, &quad)? / (2.0 * PI * PI);
    add("widom slope of x(1-x) = 1/(2 pi^2)", (widom - 1.0 / (2.0 * PI * PI)).abs(), 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=12usize);
        let rank = rng.random_range(0..=n);
        let pi = random_projection(n, rank, &mut rng)?;
        let mask: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        let (a, b) = complement_duality_check(&pi, &mask)?;
        worst = worst.max((a - b).abs());
    }
    add("complement duality (50 seeded pairs)", worst, 1e-10);

    let reg = Interval::new(0.0, 1.0)?;
    let tr = translate_check(|u, up| limiting_kernel(1, 1.0, 16.0, u, up), &reg, -37.25, 96)?;
    let mut dev = (tr.trace.0 - tr.trace.1).abs();
    for (_, a, b) in &tr.schatten {
        dev = dev.max((a - b).abs() / a.abs().max(1.0));
    }
    add("translation covariance", dev, 1e-8);

    let lin = limiting_difference(1, 1.0, 16.0, &reg, &SpectralFunction::identity(), NodeRule::GaussLegendre)?;
    add("linear f gives zero difference", lin.d_value.abs(), 1e-9);

    let sm = spectral_mapping_check(1, 1.0, 16.0, &TorusGrid { length: 1.0, n: 192 }, 400)?;
    add("spectral mapping trace", sm.relative_difference, 5e-3);

    add("angular operator symmetry", angular_symmetry_defect(0.5, 64)?, 1e-9);

    let lw = [0.1, 1.0, 10.0, 1e3].iter().map(|&x: &f64| {
        let w = lambert_w(x);
        (w * w.exp() - x).abs() / x
    });
    add("lambert W identity", lw.fold(0.0, f64::max), 1e-12);

    let bh = bh_entropy_heuristic(1.0, 0.1)?;
    add("mode counting S = 100/6", (bh.s_bh - 100.0 / 6.0).abs(), 0.0);

    let mut report = format!("{:<40} {:>12} {:>10}  result\n", "check", "deviation", "tolerance");
    let mut failures = 0;
    for c in &checks {
        let ok = c.deviation <= c.tolerance;
        if !ok {
            failures += 1;
        }
        report.push_str(&format!(
            "{:<40} {:>12.3e} {:>10.1e}  {}\n",
            c.name,
            c.deviation,
            c.tolerance,
            if ok { "PASS" } else { "FAIL" }
        ));
    }
    report.push_str(&format!("{} of {} checks passed\n", checks.len() - failures, checks.len()));
    let values = checks.iter().map(|c| (c.name.to_string(), c.deviation)).collect();
    Ok(Produced {
        records: Vec::new(),
        values,
        report,
        extra_files: Vec::new(),
        failures,
    })
}

fn dump_kernel(cfg: &RunConfig) -> Result<Produced> {
    let region = Interval::new(cfg.u0, cfg.rho)?;
    let alpha = cfg.alpha();
    let n = cfg.grid_n.unwrap_or_else(|| default_node_count(alpha, cfg.rho).max(16));
    let (x, _) = interval_rule(&region, n, NodeRule::GaussLegendre);
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("dump-kernel.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["u", "up", "re", "im"])?;
    for &u in &x {
        for &up in &x {
            let k = limiting_kernel(cfg.channel, cfg.mass, alpha, u, up);
            w.write_record([u.to_string(), up.to_string(), k.re.to_string(), k.im.to_string()])?;
        }
    }
    w.flush()?;
    let mut p = Produced::new(Vec::new(), vec![("nodes".into(), n as f64), ("alpha".into(), alpha)]);
    p.extra_files.push(path);
    Ok(p)
}

fn cache_ls(cache: &Cache) -> Result<Produced> {
    let entries = cache.list()?;
    let mut report = format!("cache directory {}\n", cache.dir().display());
    for e in &entries {
        report.push_str(&format!(
            "{}  {}  nodes={}  {}\n",
            e.path.file_name().and_then(|n| n.to_str()).unwrap_or("?"),
            if e.valid { "ok" } else { "corrupt" },
            e.nodes,
            e.key.as_deref().unwrap_or("-")
        ));
    }
    let valid = entries.iter().filter(|e| e.valid).count();
    report.push_str(&format!("{} records, {valid} valid\n", entries.len()));
    Ok(Produced {
        records: Vec::new(),
        values: vec![("records".into(), entries.len() as f64), ("valid".into(), valid as f64)],
        report,
        extra_files: Vec::new(),
        failures: 0,
    })
}

fn cache_gc(cache: &Cache) -> Result<Produced> {
    let removed = cache.gc()?;
    let mut report = String::new();
    for p in &removed {
        report.push_str(&format!("removed {}\n", p.display()));
    }
    report.push_str(&format!("{} files removed\n", removed.len()));
    Ok(Produced {
        records: Vec::new(),
        values: vec![("removed".into(), removed.len() as f64)],
        report,
        extra_files: Vec::new(),
        failures: 0,
    })
}

/// Runs the configured command and writes its artifacts under
/// `cfg.output_dir`. Cache commands write nothing.
pub fn run_command(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let cache = cache_for(cfg);
    let active = cfg.cache_enabled.then_some(&cache);
    let produced = match cfg.command {
        Command::ScalingStudy => scaling_study(cfg)?,
        Command::WidomCheck => widom_check(cfg)?,
        Command::ModeEntropy => mode_entropy_command(cfg, active)?,
        Command::U0Study => u0_study(cfg, active)?,
        Command::SchattenGrowth => schatten_growth(cfg)?,
        Command::VerifySuite => verify_suite(cfg)?,
        Command::DumpKernel => dump_kernel(cfg)?,
        Command::CacheLs => cache_ls(&cache)?,
        Command::CacheGc => cache_gc(&cache)?,
    };
    let summary = StudySummary {
        command: cfg.command.name().to_string(),
        config: cfg.clone(),
        records: produced.records,
        values: produced.values,
    };
    let mut files = Vec::new();
    if !matches!(cfg.command, Command::CacheLs | Command::CacheGc) {
        files = write_results(&cfg.output_dir, &summary, cfg.output_format)?;
        files.extend(produced.extra_files);
    }
    Ok(RunOutcome {
        summary,
        files,
        report: produced.report,
        failures: produced.failures,
    })
}
