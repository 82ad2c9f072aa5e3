use clap::Parser;
use horizon_cli::commands::run_command;
use horizon_cli::config::{Command, RawConfig, RunConfig};
use horizon_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

/// Entanglement entropy studies near the Schwarzschild horizon.
///
/// Settings come from an optional config file (`section.key = value` lines)
/// and are overridden by the flags below.
#[derive(Debug, Parser)]
#[command(name = "horizon-lab", version)]
struct Cli {
    /// mode-entropy | scaling-study | widom-check | u0-study | schatten-growth |
    /// verify-suite | dump-kernel | cache ls | cache gc
    #[arg(num_args = 0..=2)]
    command: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Same as the positional command.
    #[arg(long = "command")]
    command_flag: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    fermion_mass: Option<f64>,
    #[arg(long)]
    mode_k: Option<f64>,
    #[arg(long)]
    mode_n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Node count, or `auto`.
    #[arg(long)]
    grid_n: Option<String>,
    /// Comma-separated, increasing.
    #[arg(long)]
    alphas: Option<String>,
    /// Comma-separated, decreasing.
    #[arg(long, allow_hyphen_values = true)]
    u0_list: Option<String>,
    /// zero | constant | fit
    #[arg(long)]
    t12_strategy: Option<String>,
    /// Complex value such as `0.4i` or `0.3-0.1i`.
    #[arg(long, allow_hyphen_values = true)]
    t12: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    /// eta | quadratic | identity
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    channel: Option<u8>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
}

fn usage() -> String {
    let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
    format!("usage: horizon-lab <command> [--config FILE] [flags]\ncommands: {}\n", names.join(", "))
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::parse(&std::fs::read_to_string(p)?)?,
        None => RawConfig::default(),
    };
    if !cli.command.is_empty() {
        raw.set("run.command", cli.command.join(" "))?;
    } else if let Some(c) = &cli.command_flag {
        raw.set("run.command", c.clone())?;
    }
    if cli.epsilon.is_some() || cli.alpha.is_some() {
        raw.remove("physics.epsilon");
        raw.remove("physics.alpha");
    }
    let numbers = [
        ("physics.mass", cli.mass),
        ("physics.fermion_mass", cli.fermion_mass),
        ("mode.k", cli.mode_k),
        ("mode.lambda_override", cli.lambda),
        ("physics.epsilon", cli.epsilon),
        ("physics.alpha", cli.alpha),
        ("region.u0", cli.u0),
        ("region.rho", cli.rho),
        ("study.q", cli.q),
    ];
    for (key, v) in numbers {
        if let Some(v) = v {
            raw.set(key, v.to_string())?;
        }
    }
    let texts = [
        ("mode.n", cli.mode_n.map(|n| n.to_string())),
        ("grid.n", cli.grid_n.clone()),
        ("study.alphas", cli.alphas.clone()),
        ("study.u0_list", cli.u0_list.clone()),
        ("t12.strategy", cli.t12_strategy.clone()),
        ("t12.value", cli.t12.clone()),
        ("study.function", cli.function.clone()),
        ("study.channel", cli.channel.map(|c| c.to_string())),
        ("output.dir", cli.out_dir.as_ref().map(|p| p.display().to_string())),
        ("output.format", cli.format.clone()),
        ("run.seed", cli.seed.map(|s| s.to_string())),
        ("cache.dir", cli.cache_dir.as_ref().map(|p| p.display().to_string())),
        ("cache.enabled", cli.no_cache.then(|| "false".to_string())),
    ];
    for (key, v) in texts {
        if let Some(v) = v {
            raw.set(key, v)?;
        }
    }
    RunConfig::from_raw(&raw)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            eprint!("{}", usage());
            return ExitCode::from(1);
        }
    };
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::UnknownCommand(_)) || cli.command.is_empty() && cli.command_flag.is_none() {
                eprint!("{}", usage());
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_command(&cfg) {
        Ok(out) => {
            print!("{}", out.report);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.failures > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
