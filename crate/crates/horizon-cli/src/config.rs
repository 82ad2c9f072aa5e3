//! Run configuration. The text format is one `section.key = value` per line;
//! `#` starts a comment and blank lines are ignored.
//!
//! ```text
//! run.command = scaling-study
//! physics.mass = 1
//! physics.alpha = 64
//! region.rho = 1
//! study.alphas = 32, 64, 128
//! ```

use crate::error::{CliError, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ModeEntropy,
    ScalingStudy,
    WidomCheck,
    U0Study,
    SchattenGrowth,
    VerifySuite,
    DumpKernel,
    CacheLs,
    CacheGc,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::ModeEntropy,
        Command::ScalingStudy,
        Command::WidomCheck,
        Command::U0Study,
        Command::SchattenGrowth,
        Command::VerifySuite,
        Command::DumpKernel,
        Command::CacheLs,
        Command::CacheGc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::ModeEntropy => "mode-entropy",
            Command::ScalingStudy => "scaling-study",
            Command::WidomCheck => "widom-check",
            Command::U0Study => "u0-study",
            Command::SchattenGrowth => "schatten-growth",
            Command::VerifySuite => "verify-suite",
            Command::DumpKernel => "dump-kernel",
            Command::CacheLs => "cache ls",
            Command::CacheGc => "cache gc",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.split_whitespace().collect::<Vec<_>>().join(" ");
        Command::ALL
            .iter()
            .find(|c| c.name() == norm)
            .copied()
            .ok_or(CliError::UnknownCommand(norm))
    }
}

/// Exactly one of `ε` and `α = M/ε` is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Epsilon(f64),
    Alpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum T12Kind {
    Zero,
    Constant,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Eta,
    Quadratic,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub k: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub mass: f64,
    pub fermion_mass: f64,
    pub mode: Option<ModeSpec>,
    pub lambda_override: Option<f64>,
    pub scale: Scale,
    pub u0: f64,
    pub rho: f64,
    /// `None` selects the default node count.
    pub grid_n: Option<usize>,
    pub abs_tol: f64,
    /// `ω_min = omega_min_factor / ε`.
    pub omega_min_factor: f64,
    pub t12_strategy: T12Kind,
    pub t12_value: (f64, f64),
    pub output_dir: PathBuf,
    pub output_format: OutputFormat,
    pub alphas: Vec<f64>,
    pub u0_list: Vec<f64>,
    pub t12_values: Vec<(f64, f64)>,
    pub q: f64,
    pub window: (f64, f64),
    pub function: FunctionKind,
    pub channel: u8,
    /// Overridden by `HORIZON_LAB_CACHE_DIR`.
    pub cache_dir: Option<PathBuf>,
    pub cache_enabled: bool,
}

const KEYS: [&str; 27] = [
    "run.command",
    "run.seed",
    "physics.mass",
    "physics.fermion_mass",
    "physics.epsilon",
    "physics.alpha",
    "mode.k",
    "mode.n",
    "mode.lambda_override",
    "region.u0",
    "region.rho",
    "grid.n",
    "quad.abs_tol",
    "quad.omega_min_factor",
    "t12.strategy",
    "t12.value",
    "output.dir",
    "output.format",
    "study.alphas",
    "study.u0_list",
    "study.t12_values",
    "study.q",
    "study.window",
    "study.function",
    "study.channel",
    "cache.dir",
    "cache.enabled",
];

/// Key/value pairs as written, with the line each came from (0 for
/// values set programmatically).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| CliError::Parse {
                line: line_no,
                message: format!("expected `section.key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !key.contains('.') {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("key `{key}` has no section"),
                });
            }
            if !KEYS.contains(&key) {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("key `{key}` has no value"),
                });
            }
            if let Some((_, first)) = raw.entries.get(key) {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("key `{key}` already set on line {first}"),
                });
            }
            raw.entries.insert(key.to_string(), (value.to_string(), line_no));
        }
        Ok(raw)
    }

    /// Sets or replaces a value, as command-line flags do.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::Validation(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), (value.into(), 0));
        Ok(())
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| CliError::Parse {
                line: *line,
                message: format!("cannot read `{v}` as the value of `{key}`"),
            }),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<T>().map_err(|_| CliError::Parse {
                        line: *line,
                        message: format!("cannot read `{}` in the list `{key}`", s.trim()),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn keyword<T>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>>
    where
        T: Copy,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => options
                .iter()
                .find(|(name, _)| name == v)
                .map(|(_, t)| Some(*t))
                .ok_or_else(|| CliError::Parse {
                    line: *line,
                    message: format!(
                        "`{key}` must be one of {}, got `{v}`",
                        options.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
                    ),
                }),
        }
    }
}

fn complex_pair(c: C64) -> (f64, f64) {
    (c.re, c.im)
}

/// `a+bi` text accepted back by the parser.
pub fn format_complex(v: (f64, f64)) -> String {
    if v.1 < 0.0 || (v.1 == 0.0 && v.1.is_sign_negative()) {
        format!("{}-{}i", v.0, -v.1)
    } else {
        format!("{}+{}i", v.0, v.1)
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let command = match raw.entries.get("run.command") {
            Some((v, _)) => v.parse::<Command>()?,
            None => return Err(CliError::Validation("no command given (run.command)".into())),
        };
        let scale = match (raw.value::<f64>("physics.epsilon")?, raw.value::<f64>("physics.alpha")?) {
            (Some(e), None) => Scale::Epsilon(e),
            (None, Some(a)) => Scale::Alpha(a),
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("exactly one of physics.epsilon and physics.alpha may be set".into()))
            }
            (None, None) => Scale::Alpha(64.0),
        };
        let mode = match (raw.value::<f64>("mode.k")?, raw.value::<usize>("mode.n")?) {
            (Some(k), Some(n)) => Some(ModeSpec { k, n }),
            (None, None) => None,
            _ => return Err(CliError::Validation("mode.k and mode.n must be given together".into())),
        };
        let grid_n = match raw.get("grid.n") {
            None | Some("auto") => None,
            Some(_) => raw.value::<usize>("grid.n")?,
        };
        let cfg = RunConfig {
            command,
            seed: raw.value("run.seed")?.unwrap_or(0),
            mass: raw.value("physics.mass")?.unwrap_or(1.0),
            fermion_mass: raw.value("physics.fermion_mass")?.unwrap_or(0.0),
            mode,
            lambda_override: raw.value("mode.lambda_override")?,
            scale,
            u0: raw.value("region.u0")?.unwrap_or(-60.0),
            rho: raw.value("region.rho")?.unwrap_or(1.0),
            grid_n,
            abs_tol: raw.value("quad.abs_tol")?.unwrap_or(1e-12),
            omega_min_factor: raw.value("quad.omega_min_factor")?.unwrap_or(1e-4_f64.ln()),
            t12_strategy: raw
                .keyword("t12.strategy", &[("zero", T12Kind::Zero), ("constant", T12Kind::Constant), ("fit", T12Kind::Fit)])?
                .unwrap_or(T12Kind::Zero),
            t12_value: raw.value::<C64>("t12.value")?.map(complex_pair).unwrap_or((0.0, 0.0)),
            output_dir: raw.value::<PathBuf>("output.dir")?.unwrap_or_else(|| PathBuf::from("results")),
            output_format: raw
                .keyword("output.format", &[("csv", OutputFormat::Csv), ("json", OutputFormat::Json)])?
                .unwrap_or(OutputFormat::Csv),
            alphas: raw.list("study.alphas")?.unwrap_or_else(|| vec![32.0, 64.0, 128.0, 256.0, 512.0]),
            u0_list: raw.list("study.u0_list")?.unwrap_or_else(|| vec![-40.0, -60.0, -80.0]),
            t12_values: raw
                .list::<C64>("study.t12_values")?
                .map(|v| v.into_iter().map(complex_pair).collect())
                .unwrap_or_else(|| vec![(0.0, 0.0), (0.4, 0.0), (0.0, 0.4)]),
            q: raw.value("study.q")?.unwrap_or(1.0),
            window: match raw.list::<f64>("study.window")? {
                None => (0.0, 1.0),
                Some(v) if v.len() == 2 => (v[0], v[1]),
                Some(_) => return Err(CliError::Validation("study.window needs two numbers".into())),
            },
            function: raw
                .keyword(
                    "study.function",
                    &[("eta", FunctionKind::Eta), ("quadratic", FunctionKind::Quadratic), ("identity", FunctionKind::Identity)],
                )?
                .unwrap_or(FunctionKind::Eta),
            channel: raw.value("study.channel")?.unwrap_or(1),
            cache_dir: raw.value("cache.dir")?,
            cache_enabled: raw.value("cache.enabled")?.unwrap_or(true),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Validation(m));
        if !(self.mass > 0.0) {
            return bad(format!("physics.mass must be positive, got {}", self.mass));
        }
        if !(self.rho > 0.0) {
            return bad(format!("region.rho must be positive, got {}", self.rho));
        }
        if !(self.fermion_mass >= 0.0) {
            return bad(format!("physics.fermion_mass must be non-negative, got {}", self.fermion_mass));
        }
        match self.scale {
            Scale::Epsilon(e) if !(e > 0.0) => return bad(format!("physics.epsilon must be positive, got {e}")),
            Scale::Alpha(a) if !(a > 0.0) => return bad(format!("physics.alpha must be positive, got {a}")),
            _ => {}
        }
        if let Some(m) = self.mode {
            if m.n == 0 {
                return bad("mode.n starts at 1".into());
            }
        }
        if self.alphas.len() < 2 || self.alphas[0] < 2.0 || self.alphas.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("study.alphas must be strictly increasing from at least 2, got {:?}", self.alphas));
        }
        if self.u0_list.is_empty() || self.u0_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("study.u0_list must be strictly decreasing, got {:?}", self.u0_list));
        }
        let t = C64::new(self.t12_value.0, self.t12_value.1);
        if t.norm() > 0.5 || self.t12_values.iter().any(|v| C64::new(v.0, v.1).norm() > 0.5) {
            return bad("t12 values must satisfy |t12| ≤ 1/2".into());
        }
        if !(self.q > 0.0) {
            return bad(format!("study.q must be positive, got {}", self.q));
        }
        if !(self.window.0 < self.window.1) {
            return bad(format!("study.window must be increasing, got {:?}", self.window));
        }
        if !(self.channel == 1 || self.channel == 2) {
            return bad(format!("study.channel must be 1 or 2, got {}", self.channel));
        }
        if !(self.abs_tol > 0.0) || !(self.omega_min_factor < 0.0) {
            return bad("quad.abs_tol must be positive and quad.omega_min_factor negative".into());
        }
        if let Some(n) = self.grid_n {
            if n < 16 {
                return bad(format!("grid.n must be at least 16, got {n}"));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn alpha(&self) -> f64 {
        match self.scale {
            Scale::Alpha(a) => a,
            Scale::Epsilon(e) => self.mass / e,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self.scale {
            Scale::Epsilon(e) => e,
            Scale::Alpha(a) => self.mass / a,
        }
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("run.command", self.command.name().to_string());
        put("run.seed", self.seed.to_string());
        put("physics.mass", self.mass.to_string());
        put("physics.fermion_mass", self.fermion_mass.to_string());
        match self.scale {
            Scale::Epsilon(e) => put("physics.epsilon", e.to_string()),
            Scale::Alpha(a) => put("physics.alpha", a.to_string()),
        }
        if let Some(m) = self.mode {
            put("mode.k", m.k.to_string());
            put("mode.n", m.n.to_string());
        }
        if let Some(l) = self.lambda_override {
            put("mode.lambda_override", l.to_string());
        }
        put("region.u0", self.u0.to_string());
        put("region.rho", self.rho.to_string());
        put("grid.n", self.grid_n.map(|n| n.to_string()).unwrap_or_else(|| "auto".into()));
        put("quad.abs_tol", self.abs_tol.to_string());
        put("quad.omega_min_factor", self.omega_min_factor.to_string());
        let strategy = match self.t12_strategy {
            T12Kind::Zero => "zero",
            T12Kind::Constant => "constant",
            T12Kind::Fit => "fit",
        };
        put("t12.strategy", strategy.into());
        put("t12.value", format_complex(self.t12_value));
        put("output.dir", self.output_dir.display().to_string());
        let format = match self.output_format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        put("output.format", format.into());
        put("study.alphas", join(&self.alphas));
        put("study.u0_list", join(&self.u0_list));
        put(
            "study.t12_values",
            self.t12_values.iter().map(|v| format_complex(*v)).collect::<Vec<_>>().join(", "),
        );
        put("study.q", self.q.to_string());
        put("study.window", format!("{}, {}", self.window.0, self.window.1));
        let function = match self.function {
            FunctionKind::Eta => "eta",
            FunctionKind::Quadratic => "quadratic",
            FunctionKind::Identity => "identity",
        };
        put("study.function", function.into());
        put("study.channel", self.channel.to_string());
        if let Some(d) = &self.cache_dir {
            put("cache.dir", d.display().to_string());
        }
        put("cache.enabled", self.cache_enabled.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let c = RunConfig::parse("# header\n\nrun.command = scaling-study # trailing\nphysics.epsilon = 0.25\n").unwrap();
        assert_eq!(c.command, Command::ScalingStudy);
        assert_eq!(c.alpha(), 4.0);
    }

    #[test]
    fn parse_error_reports_line() {
        match RunConfig::parse("run.command = verify-suite\nregion.rho 2\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("run.command = verify-suite\n\nregion.rho = two\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_values() {
        let c = RunConfig::parse("run.command = u0-study\nt12.value = 0.4i\nstudy.t12_values = 0, 0.4, -0.3+0.2i\n").unwrap();
        assert_eq!(c.t12_value, (0.0, 0.4));
        assert_eq!(c.t12_values, vec![(0.0, 0.0), (0.4, 0.0), (-0.3, 0.2)]);
        assert_eq!(format_complex((0.5, -0.25)), "0.5-0.25i");
    }
}
