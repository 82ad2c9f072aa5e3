use horizon_cli::cache::{Cache, CacheKey, CacheRecord};
use horizon_cli::commands::{angular_mode, cached_basis, run_command};
use horizon_cli::config::{Command, RunConfig, Scale};
use horizon_cli::output::{read_csv, read_json, write_csv, ResultRecord, StudySummary, COLUMNS};
use horizon_cli::CliError;
use horizon_core::entropy::SpectralFunction;
use horizon_core::frequency::{full_path_difference, FullPathBasis};
use horizon_core::opalpha::Interval;
use num_complex::Complex64 as C64;
use std::fs;
use std::process::Command as Process;

fn bin() -> Process {
    let mut p = Process::new(env!("CARGO_BIN_EXE_horizon-lab"));
    p.env_remove("HORIZON_LAB_CACHE_DIR");
    p
}

fn small_full_config(dir: &std::path::Path) -> RunConfig {
    RunConfig::parse(&format!(
        "run.command = u0-study\n\
         physics.fermion_mass = 0.1\n\
         physics.alpha = 16\n\
         mode.k = 0.5\n\
         mode.n = 1\n\
         mode.lambda_override = 1.5\n\
         region.rho = 1\n\
         study.u0_list = -20, -30\n\
         study.t12_values = 0, 0.4i\n\
         output.dir = {}\n\
         cache.dir = {}\n",
        dir.join("out").display(),
        dir.join("cache").display()
    ))
    .unwrap()
}

#[test]
fn minimal_config_round_trips() {
    let c = RunConfig::parse("run.command = scaling-study\n").unwrap();
    assert_eq!(c.command, Command::ScalingStudy);
    assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);

    let full = RunConfig::parse(
        "run.command = u0-study\nphysics.epsilon = 0.00390625\nphysics.mass = 2\nmode.k = 1.5\nmode.n = 2\n\
         t12.strategy = constant\nt12.value = 0.1-0.3i\nstudy.alphas = 4, 8.5, 16\ngrid.n = 128\ncache.enabled = false\n",
    )
    .unwrap();
    assert_eq!(RunConfig::parse(&full.to_text()).unwrap(), full);
    assert_eq!(full.alpha(), 512.0);
    assert_eq!(full.scale, Scale::Epsilon(0.00390625));
}

#[test]
fn validation_errors() {
    let both = RunConfig::parse("run.command = scaling-study\nphysics.epsilon = 0.1\nphysics.alpha = 10\n");
    assert!(matches!(both, Err(CliError::Validation(_))), "{both:?}");
    let rho = RunConfig::parse("run.command = scaling-study\nregion.rho = -1\n");
    assert!(matches!(rho, Err(CliError::Validation(ref m)) if m.contains("rho")), "{rho:?}");
    let alphas = RunConfig::parse("run.command = scaling-study\nstudy.alphas = 8, 4\n");
    assert!(matches!(alphas, Err(CliError::Validation(_))));
    let t12 = RunConfig::parse("run.command = u0-study\nt12.value = 0.6\n");
    assert!(matches!(t12, Err(CliError::Validation(_))));
    let unknown = RunConfig::parse("run.command = scaling-study\nphysics.charge = 1\n");
    assert!(matches!(unknown, Err(CliError::Parse { line: 2, .. })));
    let dup = RunConfig::parse("run.command = scaling-study\nregion.rho = 1\nregion.rho = 2\n");
    assert!(matches!(dup, Err(CliError::Parse { line: 3, .. })));
    assert_eq!(CliError::Validation(String::new()).exit_code(), 1);
    assert_eq!(CliError::Numeric(horizon_core::Error::Domain(String::new())).exit_code(), 2);
}

#[test]
fn unknown_command_exits_one_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown command") && err.contains("usage"), "{err}");

    let none = bin().output().unwrap();
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn bad_config_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.cfg");
    fs::write(&p, "run.command = verify-suite\nregion.rho = -1\n").unwrap();
    let out = bin().arg("--config").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_config_file_exits_three() {
    let out = bin().args(["verify-suite", "--config", "/nonexistent/horizon.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify-suite", "--seed", "7", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS") && !text.contains("FAIL"), "{text}");
    assert!(dir.path().join("verify-suite.summary.json").exists());
}

#[test]
fn csv_columns_and_empty_study() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    write_csv(&p, &[]).unwrap();
    assert_eq!(fs::read_to_string(&p).unwrap(), COLUMNS.join(",") + "\n");

    let rec = ResultRecord {
        study_id: "s".into(),
        alpha: Some(64.0),
        d_value: Some(0.1 + 0.2),
        n: Some(3),
        ..Default::default()
    };
    write_csv(&p, &[rec.clone(), rec.clone()]).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    assert_eq!(lines.next().unwrap(), "s,64.0,,,,,,3,,,,0.30000000000000004,,,");
    assert_eq!(read_csv(&p).unwrap(), vec![rec.clone(), rec]);
}

#[test]
fn json_summary_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse("run.command = verify-suite\n").unwrap();
    let summary = StudySummary {
        command: "verify-suite".into(),
        config: cfg,
        records: vec![ResultRecord {
            study_id: "x".into(),
            slope: Some(1.0 / 3.0),
            r_squared: Some(0.999_999_999_999_9),
            ..Default::default()
        }],
        values: vec![("a".into(), std::f64::consts::PI), ("b".into(), 1e-300)],
    };
    let p = dir.path().join("s.json");
    horizon_cli::output::write_json(&p, &summary).unwrap();
    assert_eq!(read_json(&p).unwrap(), summary);
}

fn sample_record() -> CacheRecord {
    let s = |a: f64| [C64::new(a, -a / 3.0), C64::new(1.0 / a, f64::MIN_POSITIVE)];
    CacheRecord {
        key: "omega=-0.05;lambda=1.5".into(),
        u: vec![-100.0, -50.5, 0.1 + 0.2],
        y: vec![s(1.0), s(3.0), s(7.0)],
        dy: vec![s(0.1), s(1e-300), s(-2.5)],
        f0: s(std::f64::consts::E),
    }
}

fn key() -> CacheKey {
    CacheKey {
        omega: -0.05,
        lambda: 1.5,
        m: 0.1,
        mass: 1.0,
        tol: 1e-10,
        u_start_over_m: -100.0,
        u_max_over_m: 40.0,
    }
}

#[test]
fn cache_record_round_trip_is_bit_exact() {
    let rec = sample_record();
    let back = CacheRecord::decode(&rec.encode().unwrap(), "mem").unwrap();
    assert_eq!(back, rec);
    for (a, b) in rec.u.iter().zip(&back.u) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn corrupted_record_is_rejected_and_collected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let mut rec = sample_record();
    rec.key = key().text();
    let path = cache.store(&key(), &rec).unwrap();
    assert_eq!(cache.load(&key()).unwrap(), Some(rec));

    let text = fs::read_to_string(&path).unwrap();
    let (header, payload) = text.split_once('\n').unwrap();
    let flipped = if payload.starts_with('0') { format!("1{}", &payload[1..]) } else { format!("0{}", &payload[1..]) };
    fs::write(&path, format!("{header}\n{flipped}")).unwrap();
    assert!(matches!(cache.load(&key()), Err(CliError::Cache { .. })));

    fs::write(dir.path().join(".x.rec.tmp-1"), "partial").unwrap();
    let listed = cache.list().unwrap();
    assert_eq!(listed.len(), 1);
    assert!(!listed[0].valid);
    assert_eq!(cache.gc().unwrap().len(), 2);
    assert!(cache.list().unwrap().is_empty());
}

#[test]
fn warm_cache_reproduces_cold_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_full_config(dir.path());
    let cache = Cache::new(dir.path().join("cache"));
    let mode = angular_mode(&cfg).unwrap();
    let region = Interval::new(-20.0, 1.0).unwrap();
    let f = SpectralFunction::eta();
    let t12 = C64::new(0.2, -0.1);

    let uncached = cached_basis(&cfg, &mode, cfg.epsilon(), None).unwrap();
    let cold = cached_basis(&cfg, &mode, cfg.epsilon(), Some(&cache)).unwrap();
    let stored = cache.list().unwrap().len();
    assert!(stored > 0 && stored == cold.band.len());
    let warm = cached_basis(&cfg, &mode, cfg.epsilon(), Some(&cache)).unwrap();
    let d = |b: &FullPathBasis| full_path_difference(b, &region, t12, &f).unwrap().result.d_value;
    let (d0, d1, d2) = (d(&uncached), d(&cold), d(&warm));
    assert!((d1 - d0).abs() <= 1e-12 && (d2 - d1).abs() <= 1e-12, "{d0} {d1} {d2}");

    for e in cache.list().unwrap() {
        assert!(e.valid && e.nodes > 0);
        let rec = CacheRecord::decode(&fs::read_to_string(&e.path).unwrap(), "x").unwrap();
        assert_eq!(Some(rec.key), e.key);
    }
}

#[test]
fn repeated_run_with_warm_cache_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_full_config(dir.path());
    let first = run_command(&cfg).unwrap();
    let csv = first.files.iter().find(|p| p.extension().unwrap() == "csv").unwrap().clone();
    let a = fs::read(&csv).unwrap();
    let second = run_command(&cfg).unwrap();
    assert_eq!(second.files[0], csv);
    assert_eq!(fs::read(&csv).unwrap(), a);
    assert_eq!(read_csv(&csv).unwrap().len(), 4);
}

#[test]
fn cache_dir_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from-env");
    let cache = Cache::new(&env_dir);
    let mut rec = sample_record();
    rec.key = key().text();
    cache.store(&key(), &rec).unwrap();
    let out = bin()
        .args(["cache", "ls", "--cache-dir"])
        .arg(dir.path().join("from-flag"))
        .env("HORIZON_LAB_CACHE_DIR", &env_dir)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0));
    assert!(text.contains("from-env") && text.contains("1 records, 1 valid"), "{text}");
}

#[test]
fn scaling_study_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["scaling-study", "--alphas", "4,8,16", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("scaling-study.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.slope.is_some() && r.d_value.is_some()));
    let dat = fs::read_to_string(dir.path().join("scaling-study.dat")).unwrap();
    assert_eq!(dat.lines().count(), 4);
    let summary = read_json(&dir.path().join("scaling-study.summary.json")).unwrap();
    assert_eq!(summary.records, rows);
}
